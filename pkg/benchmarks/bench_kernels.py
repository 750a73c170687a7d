#!/usr/bin/env python3
"""Compiled vs numpy kernels on synthetic random walks.

    python benchmarks/bench_kernels.py [--repeats 3] [--csv out.csv]

Each case reports the median wall-clock time over the repeats and checks that
both backends return identical arrays.
"""

import argparse
import statistics
import sys
import time

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from sist import _backend, _pykernels

try:
    from sist import _ckernels
except ImportError:
    _ckernels = None


def median_time(fn, repeats):
    times = []
    out = None
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return statistics.median(times), out


def cases(rng):
    for n, m in ((30, 100), (60, 200)):
        X = rng.standard_normal((n, m)).cumsum(axis=1)
        L = 3
        S = np.ascontiguousarray(sliding_window_view(X, L, axis=1).reshape(-1, L))
        offs = np.tile(np.arange(m - L + 1), n)
        yield f"relaxed_shifted n={n} m={m}", lambda impl, S=S, X=X, o=offs: _backend.relaxed_matrix(
            S, o, X, 3, 3, 0, impl=impl)
        yield f"relaxed_dp n={n} m={m}", lambda impl, S=S, X=X, o=offs: _backend.relaxed_matrix(
            S, o, X, 3, 3, 1, impl=impl)
        sub = S[:: max(1, len(S) // 400)]
        yield f"sliding_min n={n} m={m} N={len(sub)}", lambda impl, S=sub, X=X: _backend.sliding_min_matrix(
            S, X, impl=impl)
        yield f"all_lengths n={n} m={m // 4}", lambda impl, X=X[:, : m // 4]: _backend.all_lengths_sliding_min(
            X[0], X, 1, X.shape[1], impl=impl)
    y = np.where(np.arange(80) % 2, 1.0, -1.0)
    F = rng.standard_normal((80, 40)) + y[:, None] * 0.3
    K = F @ F.T
    yield "smo n=80", lambda impl: _backend.smo(K, y, 1.0, 1e-6, 10_000, impl=impl)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)

    if _ckernels is None:
        print("compiled extension not built; only the numpy backend is timed", file=sys.stderr)
    rng = np.random.default_rng(args.seed)
    rows = ["case,python_s,compiled_s,speedup,identical"]
    print(f"{'case':<40} {'python':>10} {'compiled':>10} {'speedup':>8}  same")
    for name, fn in cases(rng):
        t_py, out_py = median_time(lambda: fn(_pykernels), args.repeats)
        if _ckernels is None:
            t_c, same = float("nan"), ""
        else:
            t_c, out_c = median_time(lambda: fn(_ckernels), args.repeats)
            if isinstance(out_py, tuple):  # smo: alphas agree to rounding, the rest exactly
                same = str(np.allclose(out_py[0], out_c[0], atol=1e-9) and out_py[2] == out_c[2])
            else:
                same = str(np.array_equal(out_py, out_c))
        speed = t_py / t_c if t_c == t_c and t_c > 0 else float("nan")
        print(f"{name:<40} {t_py:>10.4f} {t_c:>10.4f} {speed:>8.1f}  {same}")
        rows.append(f"{name},{t_py!r},{t_c!r},{speed!r},{same}")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
