"""Full model: parameter registry, per-instance tensors, forward/backward, prediction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .answer import SPAN, TYPES, ContextLayout, HeadParams, predict_answer, token_arg_indices
from .chain import RnnParams, beam_search, frontiers, gold_path, sf_from_path
from .data import QAInstance, SrlAnnotation
from .embed import EncoderParams, VocabEmbeddings, summary_features, summary_width, token_features
from .errors import GoldPathDisconnected
from .gcn import GcnParams, assemble_features, gcn_backward, gcn_forward, normalize_adjacency
from .graph import HeteroGraph, build_graph
from .nn import Mlp, cross_entropy, cross_entropy_grad
from .select import MAX_Q_NEW, SelectorParams, score_summary, selector_loss, selector_loss_grad


@dataclass(frozen=True)
class Dims:
    dim: int = 300
    d_model: int = 64
    gcn_hidden: int = 128
    gcn_out: int = 64
    rnn_hidden: int = 64
    head_hidden: int = 64
    sel_hidden: int = 64


def param_shapes(d: Dims) -> dict:
    """Name -> (shape, fan_in). Order is fixed; it drives initialization and checkpoints."""
    F_in, dm, F2 = summary_width(d.dim), d.d_model, d.gcn_out
    span_in = dm + F2
    return {
        "enc.W": ((F_in, dm), F_in),
        "enc.b": ((dm,), F_in),
        "enc.W_tok": ((d.dim + 1, dm), d.dim + 1),
        "enc.b_tok": ((dm,), d.dim + 1),
        "selenc.W": ((F_in, dm), F_in),
        "selenc.b": ((dm,), F_in),
        "sel.W_a": ((dm, d.sel_hidden), dm),
        "sel.b_a": ((d.sel_hidden,), dm),
        "sel.W_b": ((d.sel_hidden, 1), d.sel_hidden),
        "sel.b_b": ((1,), d.sel_hidden),
        "gcn.W1": ((2 * d.dim, d.gcn_hidden), 2 * d.dim),
        "gcn.W2": ((d.gcn_hidden, F2), d.gcn_hidden),
        "rnn.W": ((d.rnn_hidden, d.rnn_hidden), d.rnn_hidden + F2 + dm),
        "rnn.U": ((d.rnn_hidden, F2 + dm), d.rnn_hidden + F2 + dm),
        "rnn.V": ((1, d.rnn_hidden), d.rnn_hidden),
        "rnn.b_h": ((d.rnn_hidden,), d.rnn_hidden + F2 + dm),
        "rnn.b_o": ((1,), d.rnn_hidden),
        "type.W1": ((dm, d.head_hidden), dm),
        "type.b1": ((d.head_hidden,), dm),
        "type.W2": ((d.head_hidden, 3), d.head_hidden),
        "type.b2": ((3,), d.head_hidden),
        "start.W1": ((span_in, d.head_hidden), span_in),
        "start.b1": ((d.head_hidden,), span_in),
        "start.W2": ((d.head_hidden, 1), d.head_hidden),
        "start.b2": ((1,), d.head_hidden),
        "end.W1": ((span_in, d.head_hidden), span_in),
        "end.b1": ((d.head_hidden,), span_in),
        "end.W2": ((d.head_hidden, 1), d.head_hidden),
        "end.b2": ((1,), d.head_hidden),
    }


SELECTOR_GROUP = ("selenc.", "sel.")


def is_selector_param(name: str) -> bool:
    return name.startswith(SELECTOR_GROUP)


@dataclass
class ModelParams:
    dims: Dims
    tensors: dict = field(default_factory=dict)

    @classmethod
    def init(cls, dims: Dims, seed: int) -> "ModelParams":
        rng = np.random.default_rng(seed)
        tensors = {}
        for name, (shape, fan_in) in param_shapes(dims).items():
            bound = 1.0 / np.sqrt(fan_in)
            tensors[name] = rng.uniform(-bound, bound, size=shape)
        return cls(dims, tensors)

    def __getitem__(self, name):
        return self.tensors[name]

    def names(self) -> list:
        return list(self.tensors)

    def copy(self) -> "ModelParams":
        return ModelParams(self.dims, {k: v.copy() for k, v in self.tensors.items()})

    def zeros_like(self) -> dict:
        return {k: np.zeros_like(v) for k, v in self.tensors.items()}

    @property
    def encoder(self) -> EncoderParams:
        t = self.tensors
        return EncoderParams(t["enc.W"], t["enc.b"], t["enc.W_tok"], t["enc.b_tok"])

    @property
    def selector_encoder(self) -> EncoderParams:
        t = self.tensors
        return EncoderParams(t["selenc.W"], t["selenc.b"], t["enc.W_tok"], t["enc.b_tok"])

    @property
    def selector(self) -> SelectorParams:
        t = self.tensors
        return SelectorParams(t["sel.W_a"], t["sel.b_a"], t["sel.W_b"], t["sel.b_b"])

    @property
    def gcn(self) -> GcnParams:
        return GcnParams(self.tensors["gcn.W1"], self.tensors["gcn.W2"])

    @property
    def rnn(self) -> RnnParams:
        t = self.tensors
        return RnnParams(t["rnn.W"], t["rnn.U"], t["rnn.V"], t["rnn.b_h"], t["rnn.b_o"])

    def mlp(self, prefix: str) -> Mlp:
        t = self.tensors
        return Mlp(t[prefix + ".W1"], t[prefix + ".b1"], t[prefix + ".W2"], t[prefix + ".b2"])

    @property
    def heads(self) -> HeadParams:
        return HeadParams(self.mlp("type"), self.mlp("start"), self.mlp("end"))


@dataclass(frozen=True)
class Settings:
    """Everything about an instance's tensors that is not a parameter."""

    window: int = 10
    pmi_floor: float = 0.1
    T: int = 2
    beam_width: int = 4
    max_len: int = 30
    use_graph: bool = True
    use_arg_types: bool = True
    max_q_new: int = MAX_Q_NEW


# ---------------------------------------------------------------------------
# per-instance tensors


@dataclass
class Example:
    inst: QAInstance
    selected: tuple
    graph: HeteroGraph
    A_hat: np.ndarray
    X: np.ndarray
    layout: ContextLayout
    arg_idx: np.ndarray
    tok_feat: np.ndarray
    type_feat: np.ndarray
    cand_feat: np.ndarray
    gold_type: int
    gold_span: tuple | None
    path: list | None
    fronts: list
    gold_pos: list

    @property
    def n_doc(self) -> int:
        return self.graph.n_doc


def gold_type_index(inst: QAInstance) -> int:
    return TYPES.index(inst.answer.kind)


def build_example(inst: QAInstance, srl: SrlAnnotation, v: VocabEmbeddings, selected,
                  s: Settings) -> Example:
    g = build_graph(inst, srl, selected, s.window, s.pmi_floor)
    X = assemble_features(g, v, use_roles=s.use_arg_types, use_predicates=s.use_arg_types)
    layout = ContextLayout.build(inst, selected)
    q = list(inst.question)
    cand = np.zeros((g.n_doc, summary_width(v.dim)))
    for nd in g.nodes[1:g.n_doc]:
        cand[nd.index] = summary_features(v, q, nd.tokens)
    try:
        path = gold_path(g, inst, s.T)
    except GoldPathDisconnected:
        path = None
    fronts, gold_pos = [], []
    if path is not None:
        fronts = frontiers(g, path)
        gold_pos = [f.index(path[t + 1]) for t, f in enumerate(fronts)]
    gtype = gold_type_index(inst)
    span = None
    if gtype == SPAN:
        prefer = []
        if path is not None:
            prefer = [(g.nodes[i].paragraph, g.nodes[i].sentence) for i in path[1:]]
        span = layout.find(inst.answer.text.split(), prefer)
    return Example(inst, tuple(selected), g, normalize_adjacency(g.A), X, layout,
                   token_arg_indices(g, layout), token_features(v, layout.tokens),
                   summary_features(v, q, layout.tokens), cand, gtype, span, path, fronts, gold_pos)


def ordered_gold_selection(inst: QAInstance, srl: SrlAnnotation, s: Settings) -> tuple:
    """Gold paragraphs, the one holding the first gold hop first."""
    gold = inst.gold_paragraph_indices()
    if len(gold) < 2:
        others = [i for i in range(len(inst.contexts)) if i not in gold]
        gold = (gold + others)[:2]
    a, b = gold[0], gold[1]
    g = build_graph(inst, srl, (a, b), s.window, s.pmi_floor)
    try:
        path = gold_path(g, inst, s.T)
    except GoldPathDisconnected:
        return (a, b)
    first = g.nodes[path[1]].paragraph
    return (a, b) if first == a else (b, a)


# ---------------------------------------------------------------------------
# joint forward / backward


@dataclass
class Losses:
    ans: float
    sf: float
    type: float
    total: float


def forward_backward(P: ModelParams, ex: Example, lambdas=(1.0, 1.0, 1.0), use_graph: bool = True,
                     grad: bool = True):
    """Joint loss of one example and, if ``grad``, its gradients for every tensor.

    Selector tensors always receive zero gradient here.
    """
    l1, l2, l3 = lambdas
    t = P.tensors
    n, n_doc = ex.graph.n, ex.n_doc
    F2 = t["gcn.W2"].shape[1]
    dm = t["enc.b"].shape[0]

    if use_graph:
        emb = gcn_forward(ex.A_hat, ex.X, P.gcn, n_doc)
        G = emb.G
    else:
        emb, G = None, np.zeros((n, F2))
    GS = G[:n_doc]

    Sc = np.tanh(ex.cand_feat @ t["enc.W"] + t["enc.b"])
    st = np.tanh(ex.type_feat @ t["enc.W"] + t["enc.b"])

    rnn = P.rnn
    sf_cache = []
    L_sf = 0.0
    if ex.path is not None:
        h = np.zeros(rnn.W.shape[0])
        for front, gpos in zip(ex.fronts, ex.gold_pos):
            Xc = np.concatenate([GS[front], Sc[front]], axis=1)
            hs = np.tanh(h @ rnn.W.T + Xc @ rnn.U.T + rnn.b_h)
            o = hs @ rnn.V[0] + rnn.b_o[0]
            L_sf += cross_entropy(o, gpos)
            sf_cache.append((front, Xc, h, hs, o, gpos))
            h = hs[gpos]

    type_mlp = P.mlp("type")
    tlog, tcache = type_mlp.forward(st)
    L_type = cross_entropy(tlog, ex.gold_type)

    TR = np.tanh(ex.tok_feat @ t["enc.W_tok"] + t["enc.b_tok"])
    hit = ex.arg_idx >= 0
    AR = np.zeros((len(ex.arg_idx), F2))
    AR[hit] = G[n_doc + ex.arg_idx[hit]]
    IN = np.concatenate([TR, AR], axis=1)
    start_mlp, end_mlp = P.mlp("start"), P.mlp("end")
    so, scache = start_mlp.forward(IN)
    eo, ecache = end_mlp.forward(IN)
    sl, el = so[:, 0], eo[:, 0]
    L_ans = 0.0
    if ex.gold_type == SPAN and ex.gold_span is not None:
        L_ans = cross_entropy(sl, ex.gold_span[0]) + cross_entropy(el, ex.gold_span[1])

    total = l1 * L_ans + l2 * L_sf + l3 * L_type
    losses = Losses(L_ans, L_sf, L_type, total)
    if not grad:
        return losses, None

    grads = P.zeros_like()
    dG = np.zeros((n, F2))
    dSc = np.zeros_like(Sc)

    if ex.gold_type == SPAN and ex.gold_span is not None and l1 != 0.0:
        ds = l1 * cross_entropy_grad(sl, ex.gold_span[0])
        de = l1 * cross_entropy_grad(el, ex.gold_span[1])
        dIN = np.zeros_like(IN)
        for prefix, mlp, cache, d in (("start", start_mlp, scache, ds), ("end", end_mlp, ecache, de)):
            dW1, db1, dW2, db2, dx = mlp.backward(cache, d[:, None])
            grads[prefix + ".W1"] += dW1
            grads[prefix + ".b1"] += db1
            grads[prefix + ".W2"] += dW2
            grads[prefix + ".b2"] += db2
            dIN += dx
        dZ = dIN[:, :dm] * (1.0 - TR ** 2)
        grads["enc.W_tok"] += ex.tok_feat.T @ dZ
        grads["enc.b_tok"] += dZ.sum(axis=0)
        np.add.at(dG, n_doc + ex.arg_idx[hit], dIN[hit, dm:])

    dst = np.zeros(dm)
    if l3 != 0.0:
        dW1, db1, dW2, db2, dst = type_mlp.backward(tcache, l3 * cross_entropy_grad(tlog, ex.gold_type))
        grads["type.W1"] += dW1
        grads["type.b1"] += db1
        grads["type.W2"] += dW2
        grads["type.b2"] += db2

    if sf_cache and l2 != 0.0:
        dh_next = np.zeros(rnn.W.shape[0])
        for front, Xc, h_prev, hs, o, gpos in reversed(sf_cache):
            do = l2 * cross_entropy_grad(o, gpos)
            dhs = np.outer(do, rnn.V[0])
            dhs[gpos] += dh_next
            grads["rnn.V"][0] += hs.T @ do
            grads["rnn.b_o"][0] += do.sum()
            dz = dhs * (1.0 - hs ** 2)
            dz_sum = dz.sum(axis=0)
            grads["rnn.W"] += np.outer(dz_sum, h_prev)
            grads["rnn.U"] += dz.T @ Xc
            grads["rnn.b_h"] += dz_sum
            dXc = dz @ rnn.U
            dG[front] += dXc[:, :F2]
            dSc[front] += dXc[:, F2:]
            dh_next = dz_sum @ rnn.W

    dZc = dSc * (1.0 - Sc ** 2)
    grads["enc.W"] += ex.cand_feat.T @ dZc
    grads["enc.b"] += dZc.sum(axis=0)
    dzt = dst * (1.0 - st ** 2)
    grads["enc.W"] += np.outer(ex.type_feat, dzt)
    grads["enc.b"] += dzt

    if use_graph and dG.any():
        dW1, dW2, _ = gcn_backward(ex.A_hat, ex.X, P.gcn, emb, dG)
        grads["gcn.W1"] += dW1
        grads["gcn.W2"] += dW2
    return losses, grads


# ---------------------------------------------------------------------------
# selector forward / backward


@dataclass
class SelectorExample:
    round1: np.ndarray   # (N, F_in) features of (question, paragraph)
    round2: np.ndarray   # (N, F_in) features of (question + first gold paragraph, paragraph)
    mask: np.ndarray


def build_selector_example(inst: QAInstance, v: VocabEmbeddings, first_gold: int,
                           max_q_new: int = MAX_Q_NEW) -> SelectorExample:
    q = list(inst.question)
    q_new = (q + inst.contexts[first_gold].tokens())[:max_q_new]
    paras = [p.tokens() for p in inst.contexts]
    mask = np.zeros(len(paras), dtype=np.int64)
    mask[inst.gold_paragraph_indices()] = 1
    return SelectorExample(np.stack([summary_features(v, q, p) for p in paras]),
                           np.stack([summary_features(v, q_new, p) for p in paras]), mask)


def selector_forward_backward(P: ModelParams, ex: SelectorExample, grad: bool = True):
    t = P.tensors
    loss = 0.0
    grads = {k: np.zeros_like(t[k]) for k in t if is_selector_param(k)} if grad else None
    for F in (ex.round1, ex.round2):
        S = np.tanh(F @ t["selenc.W"] + t["selenc.b"])
        pre = S @ t["sel.W_a"] + t["sel.b_a"]
        H = np.maximum(pre, 0.0)
        scores = (H @ t["sel.W_b"] + t["sel.b_b"])[:, 0]
        loss += selector_loss(scores, ex.mask)
        if not grad:
            continue
        dsc = selector_loss_grad(scores, ex.mask)
        grads["sel.W_b"] += H.T @ dsc[:, None]
        grads["sel.b_b"] += dsc.sum()
        dpre = np.outer(dsc, t["sel.W_b"][:, 0]) * (pre > 0)
        grads["sel.W_a"] += S.T @ dpre
        grads["sel.b_a"] += dpre.sum(axis=0)
        dZ = (dpre @ t["sel.W_a"].T) * (1.0 - S ** 2)
        grads["selenc.W"] += F.T @ dZ
        grads["selenc.b"] += dZ.sum(axis=0)
    return loss, grads


def select_paragraphs(P: ModelParams, inst: QAInstance, v: VocabEmbeddings,
                      max_q_new: int = MAX_Q_NEW) -> tuple:
    """Two-round selection using precomputed summary features (same result as ``select_two_rounds``)."""
    from .select import select_two_rounds

    first, second, _ = select_two_rounds(P.selector, P.selector_encoder, v, inst, max_q_new)
    return (first, second)


# ---------------------------------------------------------------------------
# prediction


@dataclass
class Prediction:
    id: str
    answer: str
    type_dist: list
    span: list | None
    sf: list
    paths: list
    selected: list

    def to_record(self) -> dict:
        return {"id": self.id, "answer": self.answer, "type_dist": self.type_dist,
                "span": self.span, "supporting_facts": self.sf, "paths": self.paths,
                "selected": self.selected}


def predict_example(P: ModelParams, ex: Example, s: Settings) -> Prediction:
    t = P.tensors
    n_doc = ex.n_doc
    if s.use_graph:
        G = gcn_forward(ex.A_hat, ex.X, P.gcn, n_doc).G
    else:
        G = np.zeros((ex.graph.n, t["gcn.W2"].shape[1]))
    Sc = np.tanh(ex.cand_feat @ t["enc.W"] + t["enc.b"])
    reps = np.concatenate([G[:n_doc], Sc], axis=1)
    paths = beam_search(ex.graph, reps, P.rnn, s.beam_width, s.T)
    sf = sf_from_path(ex.graph, ex.inst, paths[0])

    heads = P.heads
    st = np.tanh(ex.type_feat @ t["enc.W"] + t["enc.b"])
    TR = np.tanh(ex.tok_feat @ t["enc.W_tok"] + t["enc.b_tok"])
    AR = np.zeros((len(ex.arg_idx), G.shape[1]))
    hit = ex.arg_idx >= 0
    AR[hit] = G[n_doc + ex.arg_idx[hit]]
    x = np.concatenate([TR, AR], axis=1)
    ans = predict_answer(heads.type_mlp(st), heads.start_mlp(x)[:, 0], heads.end_mlp(x)[:, 0],
                         ex.layout.tokens, s.max_len)
    path_recs = [{"nodes": p.nodes, "score": p.score, "step_logits": p.step_logits,
                  "supporting_facts": sorted([list(x) for x in sf_from_path(ex.graph, ex.inst, p)])}
                 for p in paths]
    return Prediction(ex.inst.id, ans.text, ans.type_dist.tolist(),
                      list(ans.span) if ans.span is not None else None,
                      sorted([list(x) for x in sf]), path_recs, list(ex.selected))


def selector_scores(P: ModelParams, F: np.ndarray) -> np.ndarray:
    return score_summary(P.selector, np.tanh(F @ P["selenc.W"] + P["selenc.b"]))
