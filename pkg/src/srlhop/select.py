"""Two-round paragraph selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import QAInstance
from .embed import EncoderParams, VocabEmbeddings, summarize_sequence
from .errors import BadMask, TooFewParagraphs
from .nn import relu, sigmoid, softplus

MAX_Q_NEW = 384


@dataclass
class SelectorParams:
    W_a: np.ndarray   # (d_model, h_sel)
    b_a: np.ndarray   # (h_sel,)
    W_b: np.ndarray   # (h_sel, 1)
    b_b: np.ndarray   # (1,)


def score_summary(sel: SelectorParams, summary: np.ndarray) -> np.ndarray:
    """Relevance score(s) for one summary vector or a stack of them."""
    return (relu(summary @ sel.W_a + sel.b_a) @ sel.W_b + sel.b_b)[..., 0]


def score_paragraph(sel: SelectorParams, enc: EncoderParams, v: VocabEmbeddings, q_tokens,
                    para) -> float:
    return float(score_summary(sel, summarize_sequence(enc, v, q_tokens, para.tokens())))


def select_two_rounds(sel: SelectorParams, enc: EncoderParams, v: VocabEmbeddings,
                      inst: QAInstance, max_q_new: int = MAX_Q_NEW):
    """Return ``(first_idx, second_idx, q_new)``; ties go to the smallest index."""
    n = len(inst.contexts)
    if n < 2:
        raise TooFewParagraphs(f"{inst.id}: need at least 2 paragraphs, got {n}")
    q = list(inst.question)
    first_scores = [score_paragraph(sel, enc, v, q, p) for p in inst.contexts]
    first = int(np.argmax(first_scores))
    q_new = (q + inst.contexts[first].tokens())[:max_q_new]
    best, second = -np.inf, -1
    for i, p in enumerate(inst.contexts):
        if i == first:
            continue
        s = score_paragraph(sel, enc, v, q_new, p)
        if s > best:
            best, second = s, i
    return first, second, q_new


def _check_mask(scores, gold_mask):
    scores = np.asarray(scores, dtype=float)
    mask = np.asarray(gold_mask)
    if scores.ndim != 1 or scores.shape != mask.shape or scores.shape[0] < 2:
        raise BadMask(f"scores {scores.shape} and mask {mask.shape} must be equal-length vectors, N >= 2")
    if not np.isin(mask, (0, 1)).all() or int(mask.sum()) != 2:
        raise BadMask("gold mask must be 0/1 with exactly two ones")
    return scores, mask.astype(float)


def selector_loss(scores, gold_mask) -> float:
    """Mean binary cross-entropy of ``sigmoid(scores)`` against the gold mask."""
    s, y = _check_mask(scores, gold_mask)
    return float(np.mean(softplus(s) - y * s))


def selector_loss_grad(scores, gold_mask) -> np.ndarray:
    s, y = _check_mask(scores, gold_mask)
    return (sigmoid(s) - y) / s.shape[0]
