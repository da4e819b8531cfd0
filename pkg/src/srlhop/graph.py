"""Heterogeneous SRL graph: document nodes, argument nodes, K and A.

Node order is question, then for each selected paragraph its title followed by
its sentences, then argument nodes in order of first occurrence. Edge rules:

* sentence-argument: the argument occurs in the sentence (weight 1)
* sentence-sentence: the two sentences share an argument node (weight 1);
  this includes question-sentence edges
* argument-argument: some frame has both arguments (weight: floored NPMI)

Titles take part in the rules like sentences, though they rarely carry frames.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple

import numpy as np

from . import kernels
from .data import QUESTION, QAInstance, SrlAnnotation

DEFAULT_WINDOW = 10
DEFAULT_PMI_FLOOR = 0.1
FORMAT_TAG = "srlhop-graph/1"

SENT_ARG, SENT_SENT, ARG_ARG = "sent-arg", "sent-sent", "arg-arg"


class ArgKey(NamedTuple):
    phrase_norm: str
    role: str


def normalize_phrase(tokens) -> str:
    return " ".join(" ".join(tokens).lower().split())


@dataclass(frozen=True)
class Node:
    kind: str                      # question | title | sentence | argument
    index: int
    paragraph: int = -1
    sentence: int = -1
    tokens: tuple = ()             # sentence tokens, or argument phrase tokens
    role: str = ""
    occurrences: tuple = ()        # argument sites: (sentence_ref, start, end)

    @property
    def is_doc(self) -> bool:
        return self.kind != "argument"

    @property
    def key(self) -> ArgKey | None:
        if self.kind != "argument":
            return None
        return ArgKey(normalize_phrase(self.tokens), self.role)

    @property
    def ref(self):
        if self.kind == "question":
            return QUESTION
        if self.kind == "sentence":
            return (self.paragraph, self.sentence)
        return None


@dataclass(eq=False)
class HeteroGraph:
    nodes: list
    n_doc: int
    A: np.ndarray
    K: dict = field(default_factory=dict)   # (i, j), i < j -> tuple of (ref, predicate_index, word)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def k(self, i: int, j: int) -> tuple:
        return self.K.get((min(i, j), max(i, j)), ())

    def doc_neighbors(self, i: int) -> list[int]:
        row = self.A[i, :self.n_doc]
        return [j for j in np.flatnonzero(row > 0).tolist() if j != i]

    @property
    def doc_adj(self) -> np.ndarray:
        return self.A[:self.n_doc, :self.n_doc] > 0

    def node_of_ref(self, ref) -> int:
        for nd in self.nodes[:self.n_doc]:
            if nd.ref == ref:
                return nd.index
        raise KeyError(ref)

    def __eq__(self, other):
        if not isinstance(other, HeteroGraph):
            return NotImplemented
        return (self.nodes == other.nodes and self.n_doc == other.n_doc
                and self.A.shape == other.A.shape and np.array_equal(self.A, other.A)
                and self.K == other.K)


# ---------------------------------------------------------------------------
# construction


def _selected_refs(inst: QAInstance, selected):
    refs = [QUESTION]
    for p in selected:
        refs.extend((p, s) for s in range(len(inst.contexts[p].sentences)))
    return refs


def build_nodes(inst: QAInstance, selected, srl: SrlAnnotation) -> list[Node]:
    nodes = [Node("question", 0, tokens=tuple(inst.question))]
    for p in selected:
        para = inst.contexts[p]
        nodes.append(Node("title", len(nodes), paragraph=p, tokens=tuple(para.title)))
        for s, toks in enumerate(para.sentences):
            nodes.append(Node("sentence", len(nodes), paragraph=p, sentence=s, tokens=tuple(toks)))

    order: list[ArgKey] = []
    sites: dict[ArgKey, list] = {}
    surface: dict[ArgKey, tuple] = {}
    for ref in _selected_refs(inst, selected):
        sent = inst.sentence(ref)
        for frame in srl.frames(ref):
            for role, start, end in frame.arguments:
                phrase = tuple(sent[start:end])
                key = ArgKey(normalize_phrase(phrase), role)
                if key not in sites:
                    order.append(key)
                    sites[key] = []
                    surface[key] = phrase
                site = (ref, start, end)
                if site not in sites[key]:
                    sites[key].append(site)
    for key in order:
        nodes.append(Node("argument", len(nodes), tokens=surface[key], role=key.role,
                          occurrences=tuple(sites[key])))
    return nodes


def _arg_index(nodes) -> dict:
    return {nd.key: nd.index for nd in nodes if nd.kind == "argument"}


def _frames_in_graph(nodes, srl: SrlAnnotation):
    refs = [nd.ref for nd in nodes if nd.kind in ("question", "sentence")]
    for ref in refs:
        for frame in srl.frames(ref):
            yield ref, frame


def _frame_arg_nodes(ref, frame, sentence_tokens, index) -> list[int]:
    out = []
    for role, start, end in frame.arguments:
        i = index[ArgKey(normalize_phrase(sentence_tokens[start:end]), role)]
        if i not in out:
            out.append(i)
    return out


def build_edges(nodes, srl: SrlAnnotation) -> dict:
    """Edge set as ``{(i, j): kind}`` with ``i < j``."""
    edges: dict = {}
    doc_of_ref = {nd.ref: nd.index for nd in nodes if nd.kind in ("question", "sentence")}
    members: dict[int, list[int]] = {}
    for nd in nodes:
        if nd.kind != "argument":
            continue
        docs = []
        for ref, _, _ in nd.occurrences:
            d = doc_of_ref[ref]
            if d not in docs:
                docs.append(d)
        members[nd.index] = docs
        for d in docs:
            edges[(d, nd.index)] = SENT_ARG
        for a, b in combinations(sorted(docs), 2):
            edges[(a, b)] = SENT_SENT
    index = _arg_index(nodes)
    tokens_of = {nd.ref: nd.tokens for nd in nodes if nd.kind in ("question", "sentence")}
    for ref, frame in _frames_in_graph(nodes, srl):
        args = _frame_arg_nodes(ref, frame, tokens_of[ref], index)
        for a, b in combinations(sorted(args), 2):
            edges[(a, b)] = ARG_ARG
    return dict(sorted(edges.items()))


def build_K(nodes, srl: SrlAnnotation) -> dict:
    K: dict = {}
    index = _arg_index(nodes)
    tokens_of = {nd.ref: nd.tokens for nd in nodes if nd.kind in ("question", "sentence")}
    for ref, frame in _frames_in_graph(nodes, srl):
        sent = tokens_of[ref]
        args = _frame_arg_nodes(ref, frame, sent, index)
        entry = (ref, frame.predicate_index, sent[frame.predicate_index])
        for a, b in combinations(sorted(args), 2):
            cell = K.setdefault((a, b), [])
            if entry not in cell:
                cell.append(entry)
    return {k: tuple(v) for k, v in sorted(K.items())}


def npmi(p_x: float, p_y: float, p_xy: float) -> float:
    """Normalized PMI; ``-inf`` when the pair never co-occurs."""
    if p_xy <= 0.0:
        return -math.inf
    if p_xy >= 1.0:
        return 1.0
    return math.log(p_xy / (p_x * p_y)) / -math.log(p_xy)


def compute_pmi_weights(nodes, edges: dict, stream, window: int = DEFAULT_WINDOW,
                        floor: float = DEFAULT_PMI_FLOOR) -> dict:
    """Weights for argument-argument edges from sliding-window NPMI over ``stream``."""
    if window < 2:
        raise ValueError("window must be >= 2")
    pairs = [ij for ij, kind in edges.items() if kind == ARG_ARG]
    if not pairs:
        return {}
    vocab: dict = {}
    ids = np.array([vocab.setdefault(t.lower(), len(vocab)) for t in stream], dtype=np.int64)
    arg_ids = sorted({i for ij in pairs for i in ij})
    slot = {a: k for k, a in enumerate(arg_ids)}
    flat, offsets = [], [0]
    for a in arg_ids:
        for t in nodes[a].key.phrase_norm.split():
            flat.append(vocab.get(t, -1))
        offsets.append(len(flat))
    single, pair_counts, n_windows = kernels.window_counts(
        ids, np.array(flat, dtype=np.int64), np.array(offsets, dtype=np.int64),
        np.array([[slot[i], slot[j]] for i, j in pairs], dtype=np.int64), window)
    out = {}
    for r, (i, j) in enumerate(pairs):
        val = npmi(single[slot[i]] / n_windows, single[slot[j]] / n_windows,
                   pair_counts[r] / n_windows)
        out[(i, j)] = max(val, floor)
    return out


def context_stream(inst: QAInstance, selected) -> list[str]:
    """Question tokens followed by each selected paragraph (title, then sentences)."""
    out = list(inst.question)
    for p in selected:
        out.extend(inst.contexts[p].tokens())
    return out


def build_graph(inst: QAInstance, srl: SrlAnnotation, selected, window: int = DEFAULT_WINDOW,
                pmi_floor: float = DEFAULT_PMI_FLOOR) -> HeteroGraph:
    nodes = build_nodes(inst, selected, srl)
    edges = build_edges(nodes, srl)
    K = build_K(nodes, srl)
    weights = compute_pmi_weights(nodes, edges, context_stream(inst, selected), window, pmi_floor)
    n = len(nodes)
    A = np.zeros((n, n))
    for (i, j), kind in edges.items():
        w = weights[(i, j)] if kind == ARG_ARG else 1.0
        A[i, j] = A[j, i] = w
    n_doc = sum(nd.is_doc for nd in nodes)
    return HeteroGraph(nodes, n_doc, A, K)


# ---------------------------------------------------------------------------
# export


def _ref_json(ref):
    return QUESTION if ref == QUESTION else list(ref)


def _ref_from_json(raw):
    return QUESTION if raw == QUESTION else tuple(raw)


def graph_to_dict(g: HeteroGraph) -> dict:
    nodes = []
    for nd in g.nodes:
        rec = {"index": nd.index, "kind": nd.kind, "tokens": list(nd.tokens)}
        if nd.kind in ("title", "sentence"):
            rec["paragraph"] = nd.paragraph
        if nd.kind == "sentence":
            rec["sentence"] = nd.sentence
        if nd.kind == "argument":
            rec["role"] = nd.role
            rec["occurrences"] = [[_ref_json(r), s, e] for r, s, e in nd.occurrences]
        nodes.append(rec)
    iu, ju = np.nonzero(np.triu(g.A, 1))
    edges = [[int(i), int(j), float(g.A[i, j])] for i, j in zip(iu, ju)]
    K = [[i, j, [[_ref_json(r), p, w] for r, p, w in cell]] for (i, j), cell in g.K.items()]
    return {"format": FORMAT_TAG, "n": g.n, "n_doc": g.n_doc, "nodes": nodes, "edges": edges, "K": K}


def graph_from_dict(d: dict) -> HeteroGraph:
    if d.get("format") != FORMAT_TAG:
        raise ValueError(f"unknown graph format {d.get('format')!r}")
    nodes = []
    for rec in d["nodes"]:
        nodes.append(Node(
            rec["kind"], rec["index"], paragraph=rec.get("paragraph", -1),
            sentence=rec.get("sentence", -1), tokens=tuple(rec["tokens"]), role=rec.get("role", ""),
            occurrences=tuple((_ref_from_json(r), s, e) for r, s, e in rec.get("occurrences", ()))))
    A = np.zeros((d["n"], d["n"]))
    for i, j, w in d["edges"]:
        A[i, j] = A[j, i] = w
    K = {(i, j): tuple((_ref_from_json(r), p, w) for r, p, w in cell) for i, j, cell in d["K"]}
    return HeteroGraph(nodes, d["n_doc"], A, K)


def _dot_label(nd: Node) -> str:
    if nd.kind == "question":
        text = "q: " + " ".join(nd.tokens)
    elif nd.kind == "title":
        text = f"t{nd.paragraph}: " + " ".join(nd.tokens)
    elif nd.kind == "sentence":
        text = f"s{nd.paragraph}.{nd.sentence}: " + " ".join(nd.tokens)
    else:
        text = " ".join(nd.tokens) + ": " + nd.role
    return text.replace("\\", "\\\\").replace('"', '\\"')


def graph_to_dot(g: HeteroGraph) -> str:
    lines = ["graph srl {"]
    for nd in g.nodes:
        shape = "circle" if nd.is_doc else "box"
        lines.append(f'  n{nd.index} [shape={shape}, label="{_dot_label(nd)}"];')
    iu, ju = np.nonzero(np.triu(g.A, 1))
    for i, j in zip(iu.tolist(), ju.tolist()):
        a_doc, b_doc = g.nodes[i].is_doc, g.nodes[j].is_doc
        if a_doc and b_doc:
            attrs = "style=dashed, color=red"
        elif a_doc or b_doc:
            attrs = "style=dashed"
        else:
            preds = ",".join(w.replace('"', '\\"') for _, _, w in g.k(i, j))
            attrs = f'label="{preds}", weight="{g.A[i, j]:.6g}"'
        lines.append(f"  n{i} -- n{j} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(g: HeteroGraph, fmt: str = "structured") -> str:
    if fmt == "dot":
        return graph_to_dot(g)
    if fmt == "structured":
        return json.dumps(graph_to_dict(g), sort_keys=True)
    raise ValueError(f"unknown export format {fmt!r}")


def import_graph(text: str) -> HeteroGraph:
    return graph_from_dict(json.loads(text))
