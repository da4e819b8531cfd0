# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; same contracts as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def window_containment(stream, phrase_flat, phrase_offsets, Py_ssize_t window):
    cdef const long long[::1] st = np.ascontiguousarray(stream, dtype=np.int64)
    cdef const long long[::1] pf = np.ascontiguousarray(phrase_flat, dtype=np.int64)
    cdef const long long[::1] po = np.ascontiguousarray(phrase_offsets, dtype=np.int64)
    cdef Py_ssize_t n = st.shape[0]
    cdef Py_ssize_t width = min(window, n) if n else 0
    cdef Py_ssize_t n_windows = max(1, n - window + 1)
    cdef Py_ssize_t n_phrases = po.shape[0] - 1
    out_arr = np.zeros((n_phrases, n_windows), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef Py_ssize_t p, s, q, k, lo, plen, first, last
    cdef bint match
    for p in range(n_phrases):
        lo = po[p]
        plen = po[p + 1] - lo
        if plen == 0 or plen > width:
            continue
        for s in range(n - plen + 1):
            match = True
            for q in range(plen):
                if st[s + q] != pf[lo + q]:
                    match = False
                    break
            if not match:
                continue
            first = s + plen - width
            if first < 0:
                first = 0
            last = s if s < n_windows - 1 else n_windows - 1
            for k in range(first, last + 1):
                out[p, k] = 1
    return out_arr


def window_counts(stream, phrase_flat, phrase_offsets, pairs, Py_ssize_t window):
    contain_arr = window_containment(stream, phrase_flat, phrase_offsets, window)
    cdef unsigned char[:, ::1] contain = contain_arr
    cdef Py_ssize_t n_phrases = contain.shape[0], n_windows = contain.shape[1]
    pair_arr = np.ascontiguousarray(np.asarray(pairs, dtype=np.int64).reshape(-1, 2))
    cdef const long long[:, ::1] pr = pair_arr
    single_arr = np.zeros(n_phrases, dtype=np.int64)
    pair_counts_arr = np.zeros(pr.shape[0], dtype=np.int64)
    cdef long long[::1] single = single_arr
    cdef long long[::1] pc = pair_counts_arr
    cdef Py_ssize_t p, k, r, a, b
    cdef long long c
    for p in range(n_phrases):
        c = 0
        for k in range(n_windows):
            c += contain[p, k]
        single[p] = c
    for r in range(pr.shape[0]):
        a = pr[r, 0]
        b = pr[r, 1]
        c = 0
        for k in range(n_windows):
            if contain[a, k] and contain[b, k]:
                c += 1
        pc[r] = c
    return single_arr, pair_counts_arr, n_windows


def decode_span(start, end, Py_ssize_t max_len):
    cdef const double[::1] s = np.ascontiguousarray(start, dtype=np.float64)
    cdef const double[::1] e = np.ascontiguousarray(end, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0], i, j, stop, bi = 0, bj = 0
    cdef double best = -INFINITY, v
    for i in range(n):
        stop = i + max_len
        if stop > n:
            stop = n
        for j in range(i, stop):
            v = s[i] + e[j]
            if v > best:
                best = v
                bi = i
                bj = j
    return bi, bj
