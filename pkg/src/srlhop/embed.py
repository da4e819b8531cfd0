"""Word vectors and the deterministic stand-in sequence encoder.

Summary feature layout (length ``2*D + 4``), used by :func:`summarize_sequence`:

    [0, D)        mean vector of the left sequence
    [D, 2D)       mean vector of the right sequence (zeros if right is empty)
    2D            fraction of right tokens that also occur in left
    2D + 1        fraction of left tokens that also occur in right
    2D + 2        len(left)  / (len(left) + len(right))
    2D + 3        len(right) / (len(left) + len(right))

The four scalars are multiplied by ``OVERLAP_WEIGHT`` so they are not drowned
out by the 2D pooled entries.

Token feature layout (length ``D + 1``), used by :func:`encode_tokens`:

    [0, D)        word vector of the token
    D             position / sequence length
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyLeftSequence, EmptyPhrase, EmptySequence, MalformedRecord

DEFAULT_DIM = 300
DEFAULT_D_MODEL = 64
OVERLAP_WEIGHT = 10.0


@dataclass
class VocabEmbeddings:
    dim: int = DEFAULT_DIM
    table: dict = field(default_factory=dict)
    oov_seed: int = 0
    _oov: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        for tok, vec in self.table.items():
            if np.shape(vec) != (self.dim,):
                raise ValueError(f"vector for {tok!r} has shape {np.shape(vec)}, expected ({self.dim},)")

    def lookup(self, token: str) -> np.ndarray:
        vec = self.table.get(token)
        if vec is not None:
            return vec
        vec = self._oov.get(token)
        if vec is None:
            vec = oov_vector(token, self.oov_seed, self.dim)
            self._oov[token] = vec
        return vec


def oov_vector(token: str, seed: int, dim: int) -> np.ndarray:
    """Unit-norm Gaussian vector seeded by a hash of (token, seed)."""
    digest = hashlib.blake2b(f"{seed}\x1f{token}".encode("utf-8"), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    vec = rng.standard_normal(dim)
    vec /= np.linalg.norm(vec)
    vec.flags.writeable = False
    return vec


def lookup(v: VocabEmbeddings, token: str) -> np.ndarray:
    return v.lookup(token)


def load_vectors(path, dim: int | None = None, oov_seed: int = 0) -> VocabEmbeddings:
    table = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if dim is None:
                dim = len(parts) - 1
            if len(parts) != dim + 1:
                raise MalformedRecord(f"{path}:{lineno}: expected {dim} values, got {len(parts) - 1}")
            try:
                table[parts[0]] = np.array([float(x) for x in parts[1:]])
            except ValueError:
                raise MalformedRecord(f"{path}:{lineno}: non-numeric vector entry") from None
    return VocabEmbeddings(dim or DEFAULT_DIM, table, oov_seed)


def save_vectors(v: VocabEmbeddings, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tok in sorted(v.table):
            fh.write(tok + " " + " ".join(repr(float(x)) for x in v.table[tok]) + "\n")


def embed_phrase(v: VocabEmbeddings, tokens) -> np.ndarray:
    if len(tokens) == 0:
        raise EmptyPhrase("cannot embed an empty phrase")
    return np.mean([v.lookup(t) for t in tokens], axis=0)


def _mean_or_zero(v: VocabEmbeddings, tokens) -> np.ndarray:
    if len(tokens) == 0:
        return np.zeros(v.dim)
    return np.mean([v.lookup(t) for t in tokens], axis=0)


@dataclass
class EncoderParams:
    W: np.ndarray       # (2D + 4, d_model), summary projection
    b: np.ndarray       # (d_model,)
    W_tok: np.ndarray   # (D + 1, d_model), per-token projection
    b_tok: np.ndarray   # (d_model,)

    @classmethod
    def zeros(cls, dim: int, d_model: int = DEFAULT_D_MODEL) -> "EncoderParams":
        return cls(np.zeros((summary_width(dim), d_model)), np.zeros(d_model),
                   np.zeros((dim + 1, d_model)), np.zeros(d_model))

    @property
    def d_model(self) -> int:
        return self.b.shape[0]


def summary_width(dim: int) -> int:
    return 2 * dim + 4


def overlap_fractions(left, right) -> tuple:
    """``(share of right tokens found in left, share of left tokens found in right)``."""
    if len(left) == 0:
        raise EmptyLeftSequence("left sequence must be non-empty")
    left_set, right_set = set(left), set(right)
    overlap_right = sum(t in left_set for t in right) / len(right) if len(right) else 0.0
    overlap_left = sum(t in right_set for t in left) / len(left)
    return overlap_right, overlap_left


def summary_features(v: VocabEmbeddings, left, right) -> np.ndarray:
    overlap_right, overlap_left = overlap_fractions(left, right)
    n_left, n_right = len(left), len(right)
    total = n_left + n_right
    tail = np.array([overlap_right, overlap_left, n_left / total, n_right / total]) * OVERLAP_WEIGHT
    return np.concatenate([_mean_or_zero(v, left), _mean_or_zero(v, right), tail])


def summarize_sequence(enc: EncoderParams, v: VocabEmbeddings, left, right) -> np.ndarray:
    return np.tanh(summary_features(v, left, right) @ enc.W + enc.b)


def token_features(v: VocabEmbeddings, tokens) -> np.ndarray:
    if len(tokens) == 0:
        raise EmptySequence("token sequence must be non-empty")
    n = len(tokens)
    out = np.empty((n, v.dim + 1))
    for i, t in enumerate(tokens):
        out[i, :v.dim] = v.lookup(t)
        out[i, v.dim] = i / n
    return out


def encode_tokens(enc: EncoderParams, v: VocabEmbeddings, tokens) -> np.ndarray:
    """Per-token representations, one row per token."""
    return np.tanh(token_features(v, tokens) @ enc.W_tok + enc.b_tok)
