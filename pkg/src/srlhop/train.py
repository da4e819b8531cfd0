"""Joint objective, Adam, gradient reduction and the two-stage training loop."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .data import QAInstance, SrlAnnotation, restrict_srl, truncate_instance
from .embed import VocabEmbeddings
from .errors import NonFiniteLoss, ShapeMismatch
from .metrics import MetricsReport, evaluate_predictions, graph_coverage
from .model import (
    Dims,
    Example,
    ModelParams,
    Settings,
    build_example,
    build_selector_example,
    forward_backward,
    is_selector_param,
    ordered_gold_selection,
    predict_example,
    select_paragraphs,
    selector_forward_backward,
)

log = logging.getLogger(__name__)


@dataclass
class Hyper:
    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 1.0
    lr: float = 2e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    epochs: int = 50
    batch_size: int = 8
    selector_epochs: int = 30
    selector_lr: float = 2e-3
    beam_width: int = 4
    T: int = 2
    max_len: int = 30
    window: int = 10
    pmi_floor: float = 0.1
    max_paragraph_tokens: int = 256
    max_q_new: int = 384
    dim: int = 300
    d_model: int = 64
    gcn_hidden: int = 128
    gcn_out: int = 64
    rnn_hidden: int = 64
    head_hidden: int = 64
    sel_hidden: int = 64
    use_graph: bool = True
    use_arg_types: bool = True
    joint_training: bool = True

    def __post_init__(self):
        if min(self.lambda1, self.lambda2, self.lambda3) < 0:
            raise ValueError("loss weights must be >= 0")
        if self.lr <= 0 or self.selector_lr <= 0:
            raise ValueError("learning rates must be > 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("Adam betas must lie in [0, 1)")
        if self.epochs < 0 or self.selector_epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")

    @property
    def lambdas(self) -> tuple:
        return (self.lambda1, self.lambda2, self.lambda3)

    @property
    def dims(self) -> Dims:
        return Dims(self.dim, self.d_model, self.gcn_hidden, self.gcn_out, self.rnn_hidden,
                    self.head_hidden, self.sel_hidden)

    @property
    def settings(self) -> Settings:
        return Settings(self.window, self.pmi_floor, self.T, self.beam_width, self.max_len,
                        self.use_graph, self.use_arg_types, self.max_q_new)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Hyper":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown hyperparameter(s): {sorted(unknown)}")
        return cls(**d)


@dataclass
class Dataset:
    instances: list
    srl: dict
    vectors: VocabEmbeddings

    def prepared(self, max_tokens: int) -> "Dataset":
        insts, srl = [], {}
        for inst in self.instances:
            t = truncate_instance(inst, max_tokens)
            insts.append(t)
            srl[t.id] = restrict_srl(self.srl.get(inst.id, SrlAnnotation()), t) if t is not inst \
                else self.srl.get(inst.id, SrlAnnotation())
        return Dataset(insts, srl, self.vectors)


def joint_loss(l_ans: float, l_sf: float, l_type: float, h: Hyper) -> float:
    return h.lambda1 * l_ans + h.lambda2 * l_sf + h.lambda3 * l_type


# ---------------------------------------------------------------------------
# optimizer


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0

    @classmethod
    def for_params(cls, params: dict) -> "AdamState":
        return cls({k: np.zeros_like(x) for k, x in params.items()},
                   {k: np.zeros_like(x) for k, x in params.items()}, 0)


def adam_step(params: dict, grads: dict, st: AdamState, h: Hyper, lr: float | None = None,
              names=None) -> tuple:
    """One bias-corrected Adam update over ``names`` (default: every gradient given).

    Returns new ``(params, state)``; inputs are not modified.
    """
    lr = h.lr if lr is None else lr
    names = list(grads) if names is None else list(names)
    t = st.t + 1
    new_p, new_m, new_v = dict(params), dict(st.m), dict(st.v)
    for k in names:
        g = grads[k]
        if g.shape != params[k].shape:
            raise ShapeMismatch(f"{k}: gradient {g.shape} vs parameter {params[k].shape}")
        m = h.beta1 * st.m.get(k, np.zeros_like(g)) + (1 - h.beta1) * g
        v = h.beta2 * st.v.get(k, np.zeros_like(g)) + (1 - h.beta2) * g * g
        m_hat = m / (1 - h.beta1 ** t)
        v_hat = v / (1 - h.beta2 ** t)
        new_p[k] = params[k] - lr * m_hat / (np.sqrt(v_hat) + h.eps_adam)
        new_m[k], new_v[k] = m, v
    return new_p, AdamState(new_m, new_v, t)


# ---------------------------------------------------------------------------
# gradients


def compute_gradients(P: ModelParams, batch: list, h: Hyper, lambdas=None):
    """Mean joint loss and its exact gradients over ``batch`` (summed in list order, then averaged)."""
    lambdas = h.lambdas if lambdas is None else lambdas
    total = 0.0
    acc = P.zeros_like()
    for ex in batch:
        losses, g = forward_backward(P, ex, lambdas, use_graph=h.use_graph)
        if not math.isfinite(losses.total):
            raise NonFiniteLoss(f"{ex.inst.id}: non-finite loss {losses}")
        total += losses.total
        for k in acc:
            acc[k] += g[k]
    n = max(len(batch), 1)
    return total / n, {k: v / n for k, v in acc.items()}


def selector_gradients(P: ModelParams, batch: list):
    total = 0.0
    acc = None
    for ex in batch:
        loss, g = selector_forward_backward(P, ex)
        if not math.isfinite(loss):
            raise NonFiniteLoss(f"non-finite selector loss {loss}")
        total += loss
        acc = g if acc is None else {k: acc[k] + g[k] for k in acc}
    n = max(len(batch), 1)
    return total / n, {k: v / n for k, v in acc.items()}


# ---------------------------------------------------------------------------
# training


def training_examples(data: Dataset, h: Hyper) -> list:
    s = h.settings
    out = []
    for inst in data.instances:
        srl = data.srl.get(inst.id, SrlAnnotation())
        out.append(build_example(inst, srl, data.vectors, ordered_gold_selection(inst, srl, s), s))
    return out


def prediction_examples(P: ModelParams, data: Dataset, h: Hyper) -> list:
    s = h.settings
    out = []
    for inst in data.instances:
        srl = data.srl.get(inst.id, SrlAnnotation())
        sel = select_paragraphs(P, inst, data.vectors, h.max_q_new)
        out.append(build_example(inst, srl, data.vectors, sel, s))
    return out


def predict(P: ModelParams, examples: list, h: Hyper) -> list:
    s = h.settings
    return [predict_example(P, ex, s) for ex in examples]


def evaluate(P: ModelParams, pred_examples: list, gold_examples: list, h: Hyper) -> MetricsReport:
    preds = {p.id: p.to_record() for p in predict(P, pred_examples, h)}
    cov = graph_coverage([e.inst for e in gold_examples], [e.graph for e in gold_examples], h.T)
    return evaluate_predictions(preds, [e.inst for e in pred_examples], cov)


def mean_loss(P: ModelParams, examples: list, h: Hyper) -> float:
    if not examples:
        return 0.0
    return sum(forward_backward(P, ex, h.lambdas, h.use_graph, grad=False)[0].total
               for ex in examples) / len(examples)


def _batches(n: int, size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for i in range(0, n, size):
        yield order[i:i + size].tolist()


def train_selector(P: ModelParams, data: Dataset, h: Hyper, seed: int, examples=None) -> ModelParams:
    """Stage 1: fit the selector tensors on gold-paragraph labels."""
    if examples is None:
        examples = training_examples(data, h)
    sel_examples = [build_selector_example(ex.inst, data.vectors, ex.selected[0], h.max_q_new)
                    for ex in examples]
    rng = np.random.default_rng([seed, 1])
    names = [k for k in P.names() if is_selector_param(k)]
    params = P.tensors
    st = AdamState.for_params({k: params[k] for k in names})
    for epoch in range(h.selector_epochs):
        total = 0.0
        for idx in _batches(len(sel_examples), h.batch_size, rng):
            loss, grads = selector_gradients(ModelParams(P.dims, params), [sel_examples[i] for i in idx])
            total += loss * len(idx)
            params, st = adam_step(params, grads, st, h, lr=h.selector_lr, names=names)
        log.info("selector epoch %d loss %.4f", epoch + 1, total / max(len(sel_examples), 1))
    return ModelParams(P.dims, params)


def _fit(P, examples, h, rng, names, lambdas, epochs, on_epoch=None):
    params = P.tensors
    st = AdamState.for_params({k: params[k] for k in names})
    for epoch in range(epochs):
        total = 0.0
        for idx in _batches(len(examples), h.batch_size, rng):
            loss, grads = compute_gradients(ModelParams(P.dims, params), [examples[i] for i in idx],
                                            h, lambdas)
            total += loss * len(idx)
            params, st = adam_step(params, grads, st, h, names=names)
        if on_epoch is not None:
            on_epoch(epoch, ModelParams(P.dims, params), total / max(len(examples), 1))
    return ModelParams(P.dims, params)


def train(train_data: Dataset, h: Hyper, seed: int, dev_data: Dataset | None = None,
          params: ModelParams | None = None, train_selector_stage: bool = True, on_record=None):
    """Two-stage training. Returns ``(params, history)``.

    ``history`` holds one record per joint-training epoch with the dev
    :class:`MetricsReport` fields, the mean training loss and the dev loss.
    """
    if not train_data.instances:
        raise ValueError("training set is empty")
    train_data = train_data.prepared(h.max_paragraph_tokens)
    P = params if params is not None else ModelParams.init(h.dims, seed)
    examples = training_examples(train_data, h)
    if train_selector_stage and h.selector_epochs > 0:
        P = train_selector(P, train_data, h, seed, examples)

    dev_pred, dev_gold = [], []
    if dev_data is not None and dev_data.instances:
        dev_data = dev_data.prepared(h.max_paragraph_tokens)
        dev_pred = prediction_examples(P, dev_data, h)
        dev_gold = training_examples(dev_data, h)

    history = []

    def on_epoch(epoch, cur, train_loss):
        rec = {"epoch": len(history) + 1, "train_loss": train_loss}
        if dev_pred:
            rec.update(evaluate(cur, dev_pred, dev_gold, h).to_dict())
            rec["dev_loss"] = mean_loss(cur, dev_gold, h)
        history.append(rec)
        log.info("epoch %d %s", rec["epoch"], rec)
        if on_record is not None:
            on_record(rec)

    rng = np.random.default_rng([seed, 2])
    joint_names = [k for k in P.names() if not is_selector_param(k)]
    if h.joint_training:
        P = _fit(P, examples, h, rng, joint_names, h.lambdas, h.epochs, on_epoch)
    else:
        # supporting-fact path first, then the answer heads on top of it, frozen
        P = _fit(P, examples, h, rng, joint_names, (0.0, h.lambda2, 0.0), h.epochs)
        answer_names = [k for k in joint_names if k.startswith(("type.", "start.", "end.", "enc.W_tok", "enc.b_tok"))]
        P = _fit(P, examples, h, rng, answer_names, (h.lambda1, 0.0, h.lambda3), h.epochs, on_epoch)
    return P, history
