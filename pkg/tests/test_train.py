import numpy as np
import pytest

from conftest import tiny_hyper
from srlhop.embed import VocabEmbeddings
from srlhop.model import ModelParams, forward_backward
from srlhop.train import (
    AdamState,
    Dataset,
    Hyper,
    adam_step,
    compute_gradients,
    joint_loss,
    train,
    training_examples,
)


@pytest.fixture(scope="module")
def tiny_setup(small_corpus):
    instances, srl = small_corpus
    h = tiny_hyper(epochs=2, selector_epochs=1, batch_size=4)
    data = Dataset(instances[:8], srl, VocabEmbeddings(h.dim))
    return h, data, training_examples(data, h)


def test_joint_loss_weights():
    assert joint_loss(1.0, 2.0, 3.0, Hyper()) == 6.0
    assert joint_loss(1.0, 2.0, 3.0, Hyper(lambda1=2.0, lambda2=0.5, lambda3=3.0)) == 12.0


@pytest.mark.parametrize("bad", [dict(lambda2=-1.0), dict(lr=0.0), dict(beta1=1.0), dict(batch_size=0),
                                 dict(epochs=-1)])
def test_hyper_validation(bad):
    with pytest.raises(ValueError):
        Hyper(**bad)


def test_zero_weights_give_zero_gradients(tiny_setup):
    h, _, examples = tiny_setup
    P = ModelParams.init(h.dims, 0)
    loss, g = compute_gradients(P, examples[:3], h, (0.0, 0.0, 0.0))
    assert loss == 0.0 and not any(v.any() for v in g.values())


def test_gradients_linear_in_weights(tiny_setup):
    h, _, examples = tiny_setup
    P = ModelParams.init(h.dims, 1)
    batch = examples[:3]
    _, g1 = compute_gradients(P, batch, h, (0.0, 1.0, 0.0))
    _, g2 = compute_gradients(P, batch, h, (0.0, 2.0, 0.0))
    parts = [compute_gradients(P, batch, h, lam)[1] for lam in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    _, full = compute_gradients(P, batch, h, (1.0, 1.0, 1.0))
    for k in g1:
        assert np.allclose(g2[k], 2 * g1[k], atol=1e-12)
        assert np.allclose(full[k], sum(p[k] for p in parts), atol=1e-12)


def test_selector_tensors_untouched_by_joint_loss(tiny_setup):
    h, _, examples = tiny_setup
    _, g = forward_backward(ModelParams.init(h.dims, 0), examples[0])
    assert not any(g[k].any() for k in g if k.startswith(("sel.", "selenc.")))


def test_adam_first_step_hand_value():
    h = Hyper(lr=0.1)
    params, st = adam_step({"w": np.array([1.0])}, {"w": np.array([1.0])}, AdamState.for_params({"w": 0}), h)
    assert params["w"][0] == pytest.approx(0.9, abs=1e-7) and st.t == 1
    half, _ = adam_step({"w": np.array([1.0])}, {"w": np.array([0.5])}, AdamState.for_params({"w": 0}), h)
    assert half["w"][0] == pytest.approx(1 - 0.1 * 0.5 / (0.5 + 1e-8), abs=1e-12)


def test_adam_zero_gradient_keeps_value():
    h = Hyper(lr=0.1)
    w = {"w": np.array([2.0, -3.0])}
    out, _ = adam_step(w, {"w": np.zeros(2)}, AdamState.for_params(w), h)
    assert np.array_equal(out["w"], w["w"])


def test_adam_replay_is_identical():
    h = Hyper(lr=0.05)
    rng = np.random.default_rng(0)
    grads = [{"w": rng.normal(size=3)} for _ in range(5)]

    def run():
        p = {"w": np.ones(3)}
        st = AdamState.for_params(p)
        for g in grads:
            p, st = adam_step(p, g, st, h)
        return p["w"]

    assert np.array_equal(run(), run())


def test_adam_only_named_tensors_move():
    p = {"a": np.ones(2), "b": np.ones(2)}
    g = {"a": np.ones(2), "b": np.ones(2)}
    out, _ = adam_step(p, g, AdamState.for_params(p), Hyper(), names=["a"])
    assert np.array_equal(out["b"], p["b"]) and not np.array_equal(out["a"], p["a"])


def test_zero_epochs_returns_init(tiny_setup):
    h, data, _ = tiny_setup
    h0 = tiny_hyper(epochs=0, selector_epochs=0)
    P, history = train(data, h0, seed=4)
    init = ModelParams.init(h0.dims, 4)
    assert history == []
    assert all(np.array_equal(P[k], init[k]) for k in init.names())


def test_same_seed_same_history(tiny_setup):
    h, data, _ = tiny_setup
    dev = Dataset(data.instances[:3], data.srl, data.vectors)
    P1, hist1 = train(data, h, seed=7, dev_data=dev)
    P2, hist2 = train(data, h, seed=7, dev_data=dev)
    assert hist1 == hist2 and len(hist1) == h.epochs
    assert all(np.array_equal(P1[k], P2[k]) for k in P1.names())
    for key in ("epoch", "train_loss", "dev_loss", "ans_em", "sf_f1", "joint_f1", "graph_coverage"):
        assert key in hist1[0]


def test_training_reduces_loss(tiny_setup):
    h, data, _ = tiny_setup
    _, hist = train(data, tiny_hyper(epochs=8, selector_epochs=0, batch_size=4, lr=1e-2), seed=0)
    assert hist[-1]["train_loss"] < hist[0]["train_loss"]


def test_finite_difference_spot_check(tiny_setup):
    h, _, examples = tiny_setup
    P = ModelParams.init(h.dims, 2)
    batch = examples[:2]
    _, g = compute_gradients(P, batch, h)
    rng = np.random.default_rng(0)
    step = 1e-5
    for name in ("gcn.W1", "rnn.U", "start.W1", "type.b2", "enc.W_tok"):
        x = P[name].reshape(-1)
        for k in rng.choice(x.size, size=3, replace=False):
            old = x[k]
            x[k] = old + step
            up = compute_gradients(P, batch, h)[0]
            x[k] = old - step
            down = compute_gradients(P, batch, h)[0]
            x[k] = old
            num = (up - down) / (2 * step)
            assert abs(num - g[name].reshape(-1)[k]) <= 1e-6 + 1e-4 * abs(num), name
