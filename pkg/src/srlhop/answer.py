"""Answer type classification and span decoding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import QAInstance
from .errors import GoldSpanOutOfRange, LengthMismatch
from .graph import HeteroGraph
from .nn import Mlp, cross_entropy, log_softmax, softmax

TYPES = ("yes", "no", "span")
SPAN = 2
DEFAULT_MAX_LEN = 30


@dataclass
class HeadParams:
    type_mlp: Mlp    # d_model -> 3
    start_mlp: Mlp   # d_model + F2 -> 1
    end_mlp: Mlp     # d_model + F2 -> 1


@dataclass
class AnswerPrediction:
    type_dist: np.ndarray
    span: tuple | None
    text: str

    @property
    def kind(self) -> str:
        return TYPES[int(np.argmax(self.type_dist))]


@dataclass
class ContextLayout:
    """Flat token view of the selected paragraphs (title, then sentences, per paragraph)."""

    tokens: list
    offsets: dict     # (paragraph, sentence) -> first token position; sentence -1 is the title

    @classmethod
    def build(cls, inst: QAInstance, selected) -> "ContextLayout":
        tokens, offsets = [], {}
        for p in selected:
            para = inst.contexts[p]
            offsets[(p, -1)] = len(tokens)
            tokens.extend(para.title)
            for s, sent in enumerate(para.sentences):
                offsets[(p, s)] = len(tokens)
                tokens.extend(sent)
        return cls(tokens, offsets)

    def find(self, phrase, prefer=()) -> tuple | None:
        """Span of ``phrase``, searching sentences in ``prefer`` first, then everywhere."""
        phrase = list(phrase)
        n = len(phrase)
        if n == 0:
            return None
        for p, s in prefer:
            if (p, s) not in self.offsets:
                continue
            start = self.offsets[(p, s)]
            nxt = [o for o in self.offsets.values() if o > start]
            stop = min(nxt) if nxt else len(self.tokens)
            for i in range(start, stop - n + 1):
                if self.tokens[i:i + n] == phrase:
                    return (i, i + n - 1)
        for i in range(len(self.tokens) - n + 1):
            if self.tokens[i:i + n] == phrase:
                return (i, i + n - 1)
        return None


def token_arg_indices(g: HeteroGraph, layout: ContextLayout) -> np.ndarray:
    """Argument row (0-based within ``G_Arg``) for each context token, or -1.

    A token covered by several argument occurrences takes the shortest one,
    then the earliest-starting, then the lowest node index.
    """
    L = len(layout.tokens)
    best = [None] * L
    for nd in g.nodes[g.n_doc:]:
        for ref, start, end in nd.occurrences:
            if ref not in layout.offsets:
                continue
            base = layout.offsets[ref]
            key = (end - start, base + start, nd.index)
            for t in range(base + start, base + end):
                if best[t] is None or key < best[t]:
                    best[t] = key
    return np.array([-1 if b is None else b[2] - g.n_doc for b in best], dtype=np.int64)


def token_arg_map(g: HeteroGraph, G_Arg: np.ndarray, layout: ContextLayout) -> np.ndarray:
    idx = token_arg_indices(g, layout)
    out = np.zeros((len(idx), G_Arg.shape[1]))
    hit = idx >= 0
    out[hit] = G_Arg[idx[hit]]
    return out


def classify_type(hp: HeadParams, summary: np.ndarray) -> np.ndarray:
    return softmax(hp.type_mlp(summary))


def span_logits(hp: HeadParams, token_reps: np.ndarray, arg_rows: np.ndarray):
    token_reps, arg_rows = np.atleast_2d(token_reps), np.atleast_2d(arg_rows)
    if token_reps.shape[0] != arg_rows.shape[0] or token_reps.shape[0] < 1:
        raise LengthMismatch(f"{token_reps.shape[0]} token reps vs {arg_rows.shape[0]} argument rows")
    x = np.concatenate([token_reps, arg_rows], axis=1)
    return hp.start_mlp(x)[:, 0], hp.end_mlp(x)[:, 0]


def decode_span(start, end, max_len: int = DEFAULT_MAX_LEN) -> tuple:
    """Best ``(i, j)`` with ``i <= j < i + max_len`` maximizing ``start[i] + end[j]``."""
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    if start.shape != end.shape or start.ndim != 1 or start.shape[0] < 1:
        raise LengthMismatch(f"start {start.shape} vs end {end.shape}")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    i, j = kernels.decode_span(start, end, max_len)
    return int(i), int(j)


def answer_losses(type_dist, gold_type: int, start, end, gold_span) -> tuple:
    """``(L_type, L_ans)``; ``L_ans`` is zero for yes/no gold answers."""
    l_type = float(-np.log(type_dist[gold_type]))
    if gold_type != SPAN:
        return l_type, 0.0
    i, j = gold_span
    if not (0 <= i <= j < len(start)) or len(start) != len(end):
        raise GoldSpanOutOfRange(f"gold span {gold_span} outside {len(start)} tokens")
    return l_type, cross_entropy(start, i) + cross_entropy(end, j)


def predict_answer(type_logits, start, end, tokens, max_len: int = DEFAULT_MAX_LEN) -> AnswerPrediction:
    dist = np.exp(log_softmax(type_logits))
    kind = int(np.argmax(dist))
    span = decode_span(start, end, max_len)
    if kind == SPAN:
        text = " ".join(tokens[span[0]:span[1] + 1])
        return AnswerPrediction(dist, span, text)
    return AnswerPrediction(dist, None, TYPES[kind])
