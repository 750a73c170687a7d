"""Pick the kernel implementation once, at import.

``SIST_BACKEND=python`` forces the numpy fallback, ``compiled`` requires the
Cython extension, and the default ``auto`` uses the extension when it built.
``SIST_THREADS`` (or :func:`set_threads`) splits matrix kernels by rows over
a thread pool; rows are independent, so results do not depend on it.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pykernels

_choice = os.environ.get("SIST_BACKEND", "auto").lower()
if _choice not in ("auto", "python", "compiled"):
    raise ImportError(f"SIST_BACKEND must be auto, python or compiled, not {_choice!r}")

if _choice == "python":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        if _choice == "compiled":
            raise
        _impl = _pykernels

NAME = "compiled" if _impl is not _pykernels else "python"


def implementations() -> dict:
    """Every importable kernel module by name, for cross-checks and benchmarks."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["compiled"] = _ckernels
    except ImportError:
        pass
    return out

_threads = 0


def set_threads(n: int | None) -> None:
    """0 or None means auto (``SIST_THREADS`` env var, else CPU count)."""
    global _threads
    _threads = int(n or 0)


def threads() -> int:
    if _threads > 0:
        return _threads
    env = os.environ.get("SIST_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_rows(fn, N, n, impl):
    out = np.empty((N, n), dtype=np.float64)
    workers = threads() if impl is not _pykernels else 1
    if workers <= 1 or N < 2 * workers:
        fn(0, N, out)
        return out
    bounds = np.linspace(0, N, workers + 1).astype(int)
    with ThreadPoolExecutor(workers) as pool:
        list(pool.map(lambda ab: fn(ab[0], ab[1], out), zip(bounds[:-1], bounds[1:])))
    return out


def relaxed_matrix(shapelets, starts, X, left, right, mode, impl=None):
    impl = impl or _impl
    S = np.ascontiguousarray(shapelets, dtype=np.float64)
    st = np.ascontiguousarray(starts, dtype=np.int64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    return _run_rows(
        lambda a, b, out: impl.relaxed_matrix(S, st, X, int(left), int(right), int(mode), a, b, out),
        S.shape[0], X.shape[0], impl,
    )


def sliding_min_matrix(shapelets, X, impl=None):
    impl = impl or _impl
    S = np.ascontiguousarray(shapelets, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    return _run_rows(
        lambda a, b, out: impl.sliding_min_matrix(S, X, a, b, out),
        S.shape[0], X.shape[0], impl,
    )


def all_lengths_sliding_min(src, X, min_len, max_len, impl=None):
    impl = impl or _impl
    return impl.all_lengths_sliding_min(
        np.ascontiguousarray(src, dtype=np.float64),
        np.ascontiguousarray(X, dtype=np.float64),
        int(min_len), int(max_len),
    )


def smo(K, y, C, tol, max_epochs, impl=None):
    impl = impl or _impl
    return impl.smo(
        np.ascontiguousarray(K, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        float(C), float(tol), int(max_epochs),
    )
