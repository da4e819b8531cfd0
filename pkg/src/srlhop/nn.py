"""Small numerical helpers shared by the model components."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def relu(x):
    return np.maximum(x, 0.0)


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softplus(x):
    x = np.asarray(x, dtype=float)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def log_softmax(z):
    z = np.asarray(z, dtype=float)
    m = z.max(axis=-1, keepdims=True)
    return z - m - np.log(np.exp(z - m).sum(axis=-1, keepdims=True))


def softmax(z):
    return np.exp(log_softmax(z))


def cross_entropy(logits, gold: int) -> float:
    """``-log softmax(logits)[gold]``."""
    return float(-log_softmax(logits)[gold])


def cross_entropy_grad(logits, gold: int) -> np.ndarray:
    g = softmax(logits)
    g[gold] -= 1.0
    return g


@dataclass
class Mlp:
    """Two-layer perceptron ``relu(x @ W1 + b1) @ W2 + b2``; works on rows."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    def forward(self, x):
        pre = x @ self.W1 + self.b1
        hid = relu(pre)
        return hid @ self.W2 + self.b2, (x, pre, hid)

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, cache, dout):
        """Gradients ``(dW1, db1, dW2, db2, dx)`` for upstream ``dout``."""
        x, pre, hid = cache
        x2 = np.atleast_2d(x)
        hid2 = np.atleast_2d(hid)
        dout2 = dout.reshape(hid2.shape[0], -1)
        dW2 = hid2.T @ dout2
        db2 = dout2.sum(axis=0)
        dhid = (dout2 @ self.W2.T) * (np.atleast_2d(pre) > 0)
        dW1 = x2.T @ dhid
        db1 = dhid.sum(axis=0)
        dx = (dhid @ self.W1.T).reshape(np.shape(x))
        return dW1, db1, dW2, db2, dx
