import math

import numpy as np
import pytest

from oracles import decode_bruteforce
from srlhop.answer import (
    SPAN,
    ContextLayout,
    HeadParams,
    answer_losses,
    classify_type,
    decode_span,
    predict_answer,
    span_logits,
    token_arg_indices,
    token_arg_map,
)
from srlhop.errors import GoldSpanOutOfRange, LengthMismatch
from srlhop.graph import HeteroGraph, Node
from srlhop.nn import Mlp


def mlp(d_in, hidden, d_out, seed=0, zero=False):
    rng = np.random.default_rng(seed)
    if zero:
        return Mlp(np.zeros((d_in, hidden)), np.zeros(hidden), np.zeros((hidden, d_out)), np.zeros(d_out))
    return Mlp(rng.normal(size=(d_in, hidden)), rng.normal(size=hidden),
               rng.normal(size=(hidden, d_out)), rng.normal(size=d_out))


def nested_graph():
    nodes = [Node("question", 0), Node("title", 1, paragraph=0, tokens=("t",)),
             Node("sentence", 2, paragraph=0, sentence=0, tokens=("a", "b", "c", "d")),
             Node("argument", 3, tokens=("a", "b", "c", "d"), role="ARG0", occurrences=(((0, 0), 0, 4),)),
             Node("argument", 4, tokens=("b", "c"), role="ARG1", occurrences=(((0, 0), 1, 3),))]
    return HeteroGraph(nodes, 3, np.zeros((5, 5)), {})


def test_nested_spans_take_shortest():
    layout = ContextLayout(["t", "a", "b", "c", "d"], {(0, -1): 0, (0, 0): 1})
    g = nested_graph()
    idx = token_arg_indices(g, layout)
    assert idx.tolist() == [-1, 0, 1, 1, 0]
    G_Arg = np.array([[1.0, 2.0], [3.0, 4.0]])
    m = token_arg_map(g, G_Arg, layout)
    assert np.array_equal(m, [[0, 0], [1, 2], [3, 4], [3, 4], [1, 2]])


def test_layout_find_prefers_listed_sentence():
    layout = ContextLayout(["t", "x", "y", "u", "x", "y"], {(0, -1): 0, (0, 0): 1, (1, -1): 3, (1, 0): 4})
    assert layout.find(["x", "y"]) == (1, 2)
    assert layout.find(["x", "y"], prefer=[(1, 0)]) == (4, 5)
    assert layout.find(["z"]) is None


def test_zero_type_head_is_uniform():
    hp = HeadParams(mlp(4, 3, 3, zero=True), None, None)
    assert np.allclose(classify_type(hp, np.ones(4)), 1 / 3)


def test_type_hand_value():
    type_mlp = Mlp(np.eye(2), np.zeros(2), np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]), np.zeros(3))
    dist = classify_type(HeadParams(type_mlp, None, None), np.array([1.0, -1.0]))
    z = np.array([1.0, 0.0, 0.0])
    assert np.allclose(dist, np.exp(z) / np.exp(z).sum(), atol=1e-12)
    assert dist.sum() == pytest.approx(1.0)


def test_span_logits_single_token_and_per_row():
    hp = HeadParams(None, mlp(5, 4, 1, 1), mlp(5, 4, 1, 2))
    rng = np.random.default_rng(3)
    tr, ar = rng.normal(size=(6, 3)), rng.normal(size=(6, 2))
    s, e = span_logits(hp, tr, ar)
    assert s.shape == e.shape == (6,)
    for i in range(6):
        x = np.concatenate([tr[i], ar[i]])
        assert s[i] == pytest.approx(hp.start_mlp(x)[0], abs=1e-12)
        assert e[i] == pytest.approx(hp.end_mlp(x)[0], abs=1e-12)
    s1, e1 = span_logits(hp, tr[0], ar[0])
    assert s1.shape == (1,) and decode_span(s1, e1) == (0, 0)
    with pytest.raises(LengthMismatch):
        span_logits(hp, tr, ar[:3])


def test_decode_ties_and_length_cap():
    assert decode_span([0.0, 0.0, 0.0], [0.0, 0.0, 0.0]) == (0, 0)
    start, end = [5.0, 0.0, 0.0], [-9.0, -9.0, 5.0]
    assert decode_span(start, end, max_len=2) == (1, 2)
    assert decode_span(start, end, max_len=3) == (0, 2)
    with pytest.raises(LengthMismatch):
        decode_span([1.0], [1.0, 2.0])


@pytest.mark.parametrize("seed", range(10))
def test_decode_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 25))
    s, e = rng.normal(size=n), rng.normal(size=n)
    for L in (1, 3, 30):
        assert decode_span(s, e, L) == decode_bruteforce(s, e, L)


def test_losses_uniform_span():
    L = 7
    dist = np.array([0.2, 0.3, 0.5])
    l_type, l_ans = answer_losses(dist, SPAN, np.zeros(L), np.zeros(L), (2, 4))
    assert l_type == pytest.approx(-math.log(0.5))
    assert l_ans == pytest.approx(2 * math.log(L))


def test_losses_yes_has_no_span_term():
    l_type, l_ans = answer_losses(np.array([1.0, 0.0, 0.0]), 0, np.zeros(3), np.zeros(3), None)
    assert l_type == 0.0 and l_ans == 0.0


def test_losses_confident_span_near_zero():
    s = np.full(4, -50.0)
    e = np.full(4, -50.0)
    s[1], e[2] = 50.0, 50.0
    assert answer_losses(np.array([0.0, 0.0, 1.0]), SPAN, s, e, (1, 2))[1] < 1e-12
    with pytest.raises(GoldSpanOutOfRange):
        answer_losses(np.array([0.0, 0.0, 1.0]), SPAN, s, e, (3, 4))


def test_predict_answer_kinds():
    toks = ["a", "b", "c"]
    s, e = np.array([0.0, 3.0, 0.0]), np.array([0.0, 0.0, 3.0])
    span = predict_answer(np.array([0.0, 0.0, 5.0]), s, e, toks)
    assert span.kind == "span" and span.text == "b c" and span.span == (1, 2)
    no = predict_answer(np.array([0.0, 5.0, 0.0]), s, e, toks)
    assert no.kind == "no" and no.text == "no" and no.span is None
