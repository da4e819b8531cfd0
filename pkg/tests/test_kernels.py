import os
import subprocess
import sys

import numpy as np
import pytest

from srlhop import kernels

needs_compiled = pytest.mark.skipif(kernels.compiled_impl is None, reason="extension not built")


def random_pmi_inputs(rng, n_tokens, n_phrases, vocab=8):
    stream = rng.integers(0, vocab, size=n_tokens).astype(np.int64)
    flat, offsets = [], [0]
    for _ in range(n_phrases):
        flat.extend(rng.integers(-1, vocab, size=int(rng.integers(1, 4))).tolist())
        offsets.append(len(flat))
    pairs = rng.integers(0, n_phrases, size=(2 * n_phrases, 2)).astype(np.int64)
    return stream, np.array(flat, dtype=np.int64), np.array(offsets, dtype=np.int64), pairs


@needs_compiled
@pytest.mark.parametrize("seed", range(15))
def test_window_counts_parity(seed):
    rng = np.random.default_rng(seed)
    stream, flat, offsets, pairs = random_pmi_inputs(rng, int(rng.integers(1, 60)), 6)
    window = int(rng.integers(2, 12))
    py = kernels.python_impl.window_counts(stream, flat, offsets, pairs, window)
    c = kernels.compiled_impl.window_counts(stream, flat, offsets, pairs, window)
    assert np.array_equal(py[0], c[0]) and np.array_equal(py[1], c[1]) and py[2] == c[2]
    assert np.array_equal(kernels.python_impl.window_containment(stream, flat, offsets, window),
                          kernels.compiled_impl.window_containment(stream, flat, offsets, window))


@needs_compiled
@pytest.mark.parametrize("seed", range(15))
def test_decode_span_parity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 40))
    start, end = rng.normal(size=n), rng.normal(size=n)
    if seed % 3 == 0:
        start, end = np.round(start), np.round(end)   # force ties
    max_len = int(rng.integers(1, 10))
    assert kernels.python_impl.decode_span(start, end, max_len) == \
        tuple(kernels.compiled_impl.decode_span(start, end, max_len))


def test_short_stream_is_one_window():
    stream = np.array([1, 2, 3], dtype=np.int64)
    m = kernels.window_containment(stream, np.array([1, 3], dtype=np.int64), np.array([0, 1, 2]), 10)
    assert m.shape == (2, 1) and m.all()


def test_pure_python_switch():
    env = dict(os.environ, SRLHOP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import srlhop; print(srlhop.KERNEL_BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
