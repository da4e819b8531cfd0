"""Pure-Python versions of the hot kernels. Used when the compiled core is absent."""

import numpy as np


def _window_geometry(n_tokens, window):
    width = min(window, n_tokens) if n_tokens else 0
    n_windows = max(1, n_tokens - window + 1)
    return width, n_windows


def window_containment(stream, phrase_flat, phrase_offsets, window):
    """Matrix ``M[p, k] = 1`` iff phrase ``p`` lies wholly inside window ``k``."""
    stream = np.asarray(stream, dtype=np.int64)
    n = stream.shape[0]
    width, n_windows = _window_geometry(n, window)
    n_phrases = len(phrase_offsets) - 1
    out = np.zeros((n_phrases, n_windows), dtype=np.uint8)
    for p in range(n_phrases):
        lo, hi = phrase_offsets[p], phrase_offsets[p + 1]
        plen = hi - lo
        if plen == 0 or plen > width:
            continue
        phrase = phrase_flat[lo:hi]
        for s in range(n - plen + 1):
            match = True
            for q in range(plen):
                if stream[s + q] != phrase[q]:
                    match = False
                    break
            if not match:
                continue
            first = max(0, s + plen - width)
            last = min(s, n_windows - 1)
            for k in range(first, last + 1):
                out[p, k] = 1
    return out


def window_counts(stream, phrase_flat, phrase_offsets, pairs, window):
    """Per-phrase and per-pair counts of windows containing them.

    Returns ``(single, pair, n_windows)``.
    """
    contain = window_containment(stream, phrase_flat, phrase_offsets, window)
    single = contain.sum(axis=1).astype(np.int64)
    pair_counts = np.zeros(len(pairs), dtype=np.int64)
    for r in range(len(pairs)):
        a, b = pairs[r][0], pairs[r][1]
        c = 0
        for k in range(contain.shape[1]):
            if contain[a, k] and contain[b, k]:
                c += 1
        pair_counts[r] = c
    return single, pair_counts, contain.shape[1]


def decode_span(start, end, max_len):
    n = len(start)
    best = -np.inf
    bi = bj = 0
    for i in range(n):
        si = start[i]
        for j in range(i, min(n, i + max_len)):
            s = si + end[j]
            if s > best:
                best = s
                bi, bj = i, j
    return bi, bj
