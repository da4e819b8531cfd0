"""Two-layer graph convolution over the heterogeneous graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .embed import VocabEmbeddings, embed_phrase
from .errors import ShapeMismatch
from .graph import HeteroGraph

DEFAULT_F1 = 128
DEFAULT_F2 = 64
DENSE_LIMIT = 512


@dataclass
class GcnParams:
    W1: np.ndarray   # (F0, F1)
    W2: np.ndarray   # (F1, F2)


@dataclass
class GraphEmbeddings:
    E1: np.ndarray
    G: np.ndarray
    n_doc: int

    @property
    def G_S(self) -> np.ndarray:
        return self.G[:self.n_doc]

    @property
    def G_Arg(self) -> np.ndarray:
        return self.G[self.n_doc:]


def assemble_features(g: HeteroGraph, v: VocabEmbeddings, use_roles: bool = True,
                      use_predicates: bool = True) -> np.ndarray:
    """Node feature matrix of width ``2 * D``.

    Document rows hold the mean token vector in the first half. Argument rows
    hold the phrase+role embedding, then the mean vector of every predicate
    recorded in K for that node.
    """
    D = v.dim
    X = np.zeros((g.n, 2 * D))
    for nd in g.nodes[:g.n_doc]:
        if nd.tokens:
            X[nd.index, :D] = embed_phrase(v, nd.tokens)
    preds: dict[int, list] = {}
    if use_predicates:
        for (i, j), cell in g.K.items():
            for entry in cell:
                for a in (i, j):
                    lst = preds.setdefault(a, [])
                    if entry not in lst:
                        lst.append(entry)
    for nd in g.nodes[g.n_doc:]:
        phrase = list(nd.tokens) + ([nd.role] if use_roles else [])
        X[nd.index, :D] = embed_phrase(v, phrase)
        if nd.index in preds:
            X[nd.index, D:] = embed_phrase(v, [w for _, _, w in preds[nd.index]])
    return X


def normalize_adjacency(A):
    """Symmetric normalization with self-loops; sparse output above ``DENSE_LIMIT`` nodes."""
    n = A.shape[0]
    if n > DENSE_LIMIT:
        At = sp.csr_matrix(A) + sp.identity(n, format="csr")
        d = np.asarray(At.sum(axis=1)).ravel() ** -0.5
        Dm = sp.diags(d)
        return (Dm @ At @ Dm).tocsr()
    At = np.asarray(A, dtype=float) + np.eye(n)
    d = At.sum(axis=1) ** -0.5
    return At * d[:, None] * d[None, :]


def gcn_forward(A_hat, X: np.ndarray, p: GcnParams, n_doc: int | None = None) -> GraphEmbeddings:
    n = X.shape[0]
    if A_hat.shape != (n, n) or p.W1.shape[0] != X.shape[1] or p.W2.shape[0] != p.W1.shape[1]:
        raise ShapeMismatch(
            f"A_hat {A_hat.shape}, X {X.shape}, W1 {p.W1.shape}, W2 {p.W2.shape}")
    E1 = A_hat @ (X @ p.W1)
    G = A_hat @ (np.maximum(E1, 0.0) @ p.W2)
    return GraphEmbeddings(np.asarray(E1), np.asarray(G), n if n_doc is None else n_doc)


def gcn_backward(A_hat, X: np.ndarray, p: GcnParams, emb: GraphEmbeddings, dG: np.ndarray,
                 dE1: np.ndarray | None = None):
    """Reverse-mode gradients ``(dW1, dW2, dX)`` given ``dL/dG`` and optionally ``dL/dE1``."""
    if dG.shape != emb.G.shape or (dE1 is not None and dE1.shape != emb.E1.shape):
        raise ShapeMismatch(f"upstream gradient shapes {dG.shape} vs {emb.G.shape}")
    H1 = np.maximum(emb.E1, 0.0)
    AtdG = np.asarray(A_hat.T @ dG)
    dW2 = H1.T @ AtdG
    dE1_total = (AtdG @ p.W2.T) * (emb.E1 > 0)
    if dE1 is not None:
        dE1_total = dE1_total + dE1
    AtdE1 = np.asarray(A_hat.T @ dE1_total)
    dW1 = X.T @ AtdE1
    dX = AtdE1 @ p.W1.T
    return dW1, dW2, dX
