"""Answer, supporting-fact and joint EM/F1, plus graph coverage."""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import asdict, dataclass

from .chain import DEFAULT_T, gold_path
from .errors import GoldPathDisconnected

_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCT = set(string.punctuation)


def normalize_answer(s: str) -> str:
    s = s.lower()
    s = "".join(ch for ch in s if ch not in _PUNCT)
    s = _ARTICLES.sub(" ", s)
    return " ".join(s.split())


def answer_scores(pred: str, gold: str) -> tuple:
    """``(em, f1, precision, recall)`` for one answer pair."""
    p_norm, g_norm = normalize_answer(pred), normalize_answer(gold)
    em = float(p_norm == g_norm)
    zero = (em, 0.0, 0.0, 0.0)
    if p_norm in ("yes", "no", "noanswer") and p_norm != g_norm:
        return zero
    if g_norm in ("yes", "no", "noanswer") and p_norm != g_norm:
        return zero
    p_toks, g_toks = p_norm.split(), g_norm.split()
    common = Counter(p_toks) & Counter(g_toks)
    same = sum(common.values())
    if same == 0:
        return zero
    precision = same / len(p_toks)
    recall = same / len(g_toks)
    return em, 2 * precision * recall / (precision + recall), precision, recall


def answer_metrics(pred: str, gold: str) -> tuple:
    em, f1, _, _ = answer_scores(pred, gold)
    return em, f1


def sf_scores(pred_sf, gold_sf) -> tuple:
    """``(em, f1, precision, recall)`` over ``(title, sentence_index)`` pairs."""
    pred, gold = {tuple(x) for x in pred_sf}, {tuple(x) for x in gold_sf}
    tp = len(pred & gold)
    fp = len(pred - gold)
    fn = len(gold - pred)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return float(fp + fn == 0), f1, precision, recall


def sf_and_joint_metrics(pred_sf, gold_sf, ans_pair) -> tuple:
    """``(sf_em, sf_f1, joint_em, joint_f1)``; ``ans_pair`` is ``(pred_text, gold_text)``."""
    a_em, _, a_p, a_r = answer_scores(*ans_pair)
    s_em, s_f1, s_p, s_r = sf_scores(pred_sf, gold_sf)
    j_p, j_r = a_p * s_p, a_r * s_r
    j_f1 = 2 * j_p * j_r / (j_p + j_r) if j_p + j_r else 0.0
    return s_em, s_f1, a_em * s_em, j_f1


@dataclass
class MetricsReport:
    ans_em: float = 0.0
    ans_f1: float = 0.0
    sf_em: float = 0.0
    sf_f1: float = 0.0
    joint_em: float = 0.0
    joint_f1: float = 0.0
    graph_coverage: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_predictions(preds: dict, instances, coverage: float = 0.0) -> MetricsReport:
    """Average metrics of ``preds`` (id -> record with ``answer`` and ``supporting_facts``)."""
    totals = [0.0] * 6
    for inst in instances:
        rec = preds.get(inst.id, {"answer": "", "supporting_facts": []})
        a_em, a_f1 = answer_metrics(rec["answer"], inst.answer.text)
        s_em, s_f1, j_em, j_f1 = sf_and_joint_metrics(
            rec["supporting_facts"], inst.gold_sf, (rec["answer"], inst.answer.text))
        for k, val in enumerate((a_em, a_f1, s_em, s_f1, j_em, j_f1)):
            totals[k] += val
    n = max(len(instances), 1)
    return MetricsReport(*(x / n for x in totals), graph_coverage=coverage)


def is_covered(inst, graph, T: int = DEFAULT_T) -> bool:
    try:
        gold_path(graph, inst, T)
    except GoldPathDisconnected:
        return False
    return True


def graph_coverage(instances, graphs, T: int = DEFAULT_T) -> float:
    """Fraction of instances whose gold facts chain from the question within ``T`` hops."""
    if not instances:
        return 0.0
    return sum(is_covered(i, g, T) for i, g in zip(instances, graphs)) / len(instances)
