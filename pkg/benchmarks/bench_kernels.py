"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json]

Both backends get identical inputs; results are checked for equality before
any timing is reported.
"""

import argparse
import json
import sys
import time

import numpy as np

from srlhop.kernels import compiled_impl, python_impl


def pmi_case(rng, n_tokens, n_phrases, n_pairs, vocab=60):
    stream = rng.integers(0, vocab, size=n_tokens).astype(np.int64)
    flat, offsets = [], [0]
    for _ in range(n_phrases):
        if rng.random() < 0.7:
            s = int(rng.integers(0, n_tokens - 3))
            phrase = stream[s:s + int(rng.integers(1, 4))].tolist()
        else:
            phrase = rng.integers(0, vocab, size=int(rng.integers(1, 4))).tolist()
        flat.extend(phrase)
        offsets.append(len(flat))
    pairs = rng.integers(0, n_phrases, size=(n_pairs, 2)).astype(np.int64)
    return (stream, np.array(flat, dtype=np.int64), np.array(offsets, dtype=np.int64), pairs, 10)


def span_case(rng, length):
    return rng.standard_normal(length), rng.standard_normal(length), 30


def best_time(fn, args, repeat):
    out, best = None, np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="print one JSON record per case")
    args = ap.parse_args(argv)
    if compiled_impl is None:
        sys.exit("compiled extension not importable; build it with `pip install -e . --no-build-isolation`")

    rng = np.random.default_rng(args.seed)
    cases = [
        ("window_counts", "stream=300 phrases=40", pmi_case(rng, 300, 40, 80)),
        ("window_counts", "stream=2000 phrases=150", pmi_case(rng, 2000, 150, 400)),
        ("decode_span", "L=128", span_case(rng, 128)),
        ("decode_span", "L=512", span_case(rng, 512)),
    ]
    rows = []
    for name, label, inputs in cases:
        t_py, r_py = best_time(getattr(python_impl, name), inputs, args.repeat)
        t_c, r_c = best_time(getattr(compiled_impl, name), inputs, args.repeat)
        if not same(r_py, r_c):
            sys.exit(f"{name} {label}: backends disagree")
        rows.append({"kernel": name, "case": label, "python_s": t_py, "compiled_s": t_c,
                     "speedup": t_py / t_c if t_c > 0 else float("inf")})

    if args.json:
        for r in rows:
            print(json.dumps(r, sort_keys=True))
        return
    print(f"{'kernel':<14} {'case':<26} {'python ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for r in rows:
        print(f"{r['kernel']:<14} {r['case']:<26} {r['python_s'] * 1e3:>10.2f} "
              f"{r['compiled_s'] * 1e3:>12.3f} {r['speedup']:>7.0f}x")


if __name__ == "__main__":
    main()
