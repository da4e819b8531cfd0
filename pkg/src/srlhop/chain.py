"""Supporting-fact chains: RNN scoring of candidate sentences and beam search."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .data import QAInstance
from .embed import EncoderParams, VocabEmbeddings, summarize_sequence
from .errors import GoldPathDisconnected, ShapeMismatch, UnknownNode
from .graph import HeteroGraph
from .nn import cross_entropy, cross_entropy_grad, log_softmax

DEFAULT_BEAM = 4
DEFAULT_T = 2
DEFAULT_HIDDEN = 64


@dataclass
class RnnParams:
    W: np.ndarray     # (h, h)
    U: np.ndarray     # (h, d_in)
    V: np.ndarray     # (1, h)
    b_h: np.ndarray   # (h,)
    b_o: np.ndarray   # (1,)


@dataclass
class ReasoningPath:
    nodes: list
    step_logits: list = field(default_factory=list)
    score: float = 0.0
    isolated: bool = False   # question node had no neighbours


def candidate_rep(G_S: np.ndarray, enc: EncoderParams, v: VocabEmbeddings, q_tokens,
                  g: HeteroGraph, node: int) -> np.ndarray:
    if not (0 <= node < g.n_doc) or node >= G_S.shape[0]:
        raise UnknownNode(f"node {node} is not a document node")
    tokens = g.nodes[node].tokens or ("<empty>",)
    return np.concatenate([G_S[node], summarize_sequence(enc, v, q_tokens, tokens)])


def rnn_step(p: RnnParams, h_prev: np.ndarray, x: np.ndarray):
    """One step: ``h = tanh(W h_prev + U x + b_h)``, ``o = V h + b_o``. Accepts stacked ``x``."""
    if h_prev.shape[-1] != p.W.shape[1] or x.shape[-1] != p.U.shape[1]:
        raise ShapeMismatch(f"h_prev {h_prev.shape}, x {x.shape}, W {p.W.shape}, U {p.U.shape}")
    h = np.tanh(h_prev @ p.W.T + x @ p.U.T + p.b_h)
    o = h @ p.V[0] + p.b_o[0]
    return h, o


def _rep_matrix(reps, nodes):
    if callable(reps):
        return np.stack([reps(n) for n in nodes])
    return reps[nodes]


def beam_search(g: HeteroGraph, reps, p: RnnParams, beam_width: int = DEFAULT_BEAM,
                T: int = DEFAULT_T, start: int = 0) -> list[ReasoningPath]:
    """Ranked reasoning paths starting at the question node.

    ``reps`` is either a callable ``node -> vector`` or a matrix indexed by node.
    Each step softmaxes the logits over the current node's unvisited neighbours;
    paths are ranked by summed log-probability.
    """
    if beam_width < 1 or T < 1:
        raise ValueError("beam_width and T must be >= 1")
    h0 = np.zeros(p.W.shape[0])
    if not g.doc_neighbors(start):
        return [ReasoningPath([start], [], 0.0, isolated=True)]
    neighbors = {}
    active = [((start,), h0, 0.0, ())]
    finished = []
    while active:
        pool = []
        for nodes, h, score, logits in active:
            last = nodes[-1]
            if last not in neighbors:
                neighbors[last] = g.doc_neighbors(last)
            frontier = [j for j in neighbors[last] if j not in nodes]
            if not frontier:
                finished.append((nodes, score, logits))
                continue
            hs, os = rnn_step(p, h, _rep_matrix(reps, frontier))
            logp = log_softmax(os)
            for k, j in enumerate(frontier):
                pool.append((nodes + (j,), hs[k], score + float(logp[k]), logits + (float(os[k]),)))
        pool.sort(key=lambda e: (-e[2], e[0]))
        active = []
        for entry in pool[:beam_width]:
            if len(entry[0]) >= T + 1:
                finished.append((entry[0], entry[2], entry[3]))
            else:
                active.append(entry)
    finished.sort(key=lambda e: (-e[1], e[0]))
    return [ReasoningPath(list(n), list(lg), s) for n, s, lg in finished]


def sf_from_path(g: HeteroGraph, inst: QAInstance | None, path) -> set:
    """``(title, sentence_index)`` pairs for every sentence node on the path."""
    nodes = path.nodes if isinstance(path, ReasoningPath) else path
    out = set()
    for i in nodes:
        nd = g.nodes[i]
        if nd.kind != "sentence":
            continue
        if inst is not None:
            title = inst.contexts[nd.paragraph].title_text
        else:
            title = " ".join(g.nodes[_title_node(g, nd.paragraph)].tokens)
        out.add((title, nd.sentence))
    return out


def _title_node(g: HeteroGraph, paragraph: int) -> int:
    for nd in g.nodes[:g.n_doc]:
        if nd.kind == "title" and nd.paragraph == paragraph:
            return nd.index
    raise UnknownNode(f"no title node for paragraph {paragraph}")


def gold_nodes(g: HeteroGraph, inst: QAInstance) -> list[int] | None:
    """Graph nodes of the gold supporting facts, or ``None`` if one is missing."""
    by_key = {}
    for nd in g.nodes[:g.n_doc]:
        if nd.kind == "sentence":
            by_key.setdefault((inst.contexts[nd.paragraph].title_text, nd.sentence), nd.index)
    out = []
    for key in sorted(inst.gold_sf):
        if key not in by_key:
            return None
        out.append(by_key[key])
    return sorted(set(out))


def gold_path(g: HeteroGraph, inst: QAInstance, T: int = DEFAULT_T) -> list[int]:
    """First ordering (by node index) of the gold sentences that forms a chain from the question."""
    nodes = gold_nodes(g, inst)
    if not nodes or len(nodes) > T:
        raise GoldPathDisconnected(f"{inst.id}: gold facts unavailable or longer than T={T}")
    adj = g.doc_adj
    for perm in permutations(nodes):
        prev, ok = 0, True
        for j in perm:
            if not adj[prev, j]:
                ok = False
                break
            prev = j
        if ok:
            return [0, *perm]
    raise GoldPathDisconnected(f"{inst.id}: gold facts do not form a chain from the question")


def frontiers(g: HeteroGraph, path) -> list[list[int]]:
    """Teacher-forced frontier at each step of ``path``."""
    out = []
    for t in range(1, len(path)):
        visited = set(path[:t])
        out.append([j for j in g.doc_neighbors(path[t - 1]) if j not in visited])
    return out


def sf_loss(step_logits, gold) -> float:
    """Summed cross-entropy over steps; ``gold[t]`` indexes into ``step_logits[t]``."""
    return float(sum(cross_entropy(o, k) for o, k in zip(step_logits, gold)))


def sf_loss_grad(step_logits, gold) -> list:
    return [cross_entropy_grad(o, k) for o, k in zip(step_logits, gold)]
