"""Subsequence distance kernels.

Three ways to compare a shapelet ``s`` of length ``k`` with a series ``x`` of
length ``m``:

* :func:`sliding_min_distance` - best match over all ``m - k + 1`` windows,
  ``O(k (m - k))``.
* :func:`fixed_distance` - the window at the shapelet's own start position
  only, ``O(k)``.
* :func:`relaxed_fixed_distance` - best match near the own start position,
  shifted by at most ``left`` / ``right`` samples.

Positions in :class:`Placement` are 1-based. The scalar functions here are
plain Python and accumulate squared differences left to right from 0.0; the
``*_matrix`` batch functions dispatch to the compiled or numpy backend, which
use the same order, so scalar and batch results agree bit for bit.
"""

from __future__ import annotations

import enum
import math
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import LengthMismatch, PlacementOutOfRange, ShapeletLongerThanSeries

__all__ = [
    "RelaxMode",
    "RelaxConfig",
    "Placement",
    "euclidean",
    "sliding_min_distance",
    "fixed_distance",
    "relaxed_fixed_distance",
    "fixed_matrix",
    "relaxed_matrix",
    "sliding_min_matrix",
    "count_ops",
]


class RelaxMode(str, enum.Enum):
    SHIFTED_WINDOW = "shifted"
    SUBSEQUENCE_DP = "dp"

    @property
    def code(self) -> int:
        return 0 if self is RelaxMode.SHIFTED_WINDOW else 1


@dataclass(frozen=True)
class RelaxConfig:
    """Positional tolerance for the relaxed fixed distance.

    ``SHIFTED_WINDOW`` compares contiguous windows starting anywhere in
    ``[j - left, j + right]``. ``SUBSEQUENCE_DP`` also admits ordered,
    possibly gapped index selections ``i1 < ... < ik`` with ``i1`` in that
    range and ``ik < j + k + right``.
    """

    left: int = 0
    right: int = 0
    mode: RelaxMode = RelaxMode.SHIFTED_WINDOW

    def __post_init__(self):
        if self.left < 0 or self.right < 0:
            raise ValueError("relaxation must be non-negative")
        object.__setattr__(self, "left", int(self.left))
        object.__setattr__(self, "right", int(self.right))
        object.__setattr__(self, "mode", RelaxMode(self.mode))


FIXED = RelaxConfig(0, 0)


@dataclass(frozen=True)
class Placement:
    source_index: int
    start: int  # 1-based
    length: int

    def check(self, m: int) -> None:
        if self.start < 1 or self.start + self.length - 1 > m:
            raise PlacementOutOfRange(
                f"window [{self.start}, {self.start + self.length - 1}] outside series of length {m}"
            )


class _Ops:
    value = 0


_counter: _Ops | None = None


@contextmanager
def count_ops():
    """Count squared-difference terms evaluated by the scalar kernels."""
    global _counter
    prev, _counter = _counter, _Ops()
    try:
        yield _counter
    finally:
        _counter = prev


def _as_list(v) -> list[float]:
    return [float(t) for t in np.asarray(v, dtype=np.float64).ravel()]


def _sq(s: list[float], x: list[float], start: int, cutoff: float = math.inf) -> float:
    acc = 0.0
    p = 0
    for p, sv in enumerate(s):
        d = sv - x[start + p]
        acc = acc + d * d
        if acc > cutoff:
            break
    if _counter is not None:
        _counter.value += p + 1 if s else 0
    return acc


def euclidean(a, b) -> float:
    a, b = _as_list(a), _as_list(b)
    if len(a) != len(b):
        raise LengthMismatch(f"lengths {len(a)} and {len(b)} differ")
    return math.sqrt(_sq(a, b, 0))


def sliding_min_distance(s, x) -> float:
    """Minimum Euclidean distance between ``s`` and any window of ``x``.

    Windows are abandoned once their running squared sum strictly exceeds the
    best complete sum so far, which cannot change the result.
    """
    s, x = _as_list(s), _as_list(x)
    k, m = len(s), len(x)
    if k > m:
        raise ShapeletLongerThanSeries(f"shapelet length {k} > series length {m}")
    best = math.inf
    for i in range(m - k + 1):
        acc = _sq(s, x, i, best)
        if acc < best:
            best = acc
    return math.sqrt(best)


def _placed(s, placement: Placement, x):
    s, x = _as_list(s), _as_list(x)
    if len(s) != placement.length:
        raise LengthMismatch(f"shapelet length {len(s)} != placement length {placement.length}")
    placement.check(len(x))
    return s, x, placement.start - 1


def fixed_distance(s, placement: Placement, x) -> float:
    s, x, j0 = _placed(s, placement, x)
    return math.sqrt(_sq(s, x, j0))


def relaxed_fixed_distance(s, placement: Placement, x, cfg: RelaxConfig = FIXED) -> float:
    """Fixed distance with the start allowed to move ``cfg.left`` / ``cfg.right``.

    Shift ranges are clamped to the series, never rejected. With
    ``left == right == 0`` both modes equal :func:`fixed_distance` exactly.
    """
    s, x, j0 = _placed(s, placement, x)
    k, m = len(s), len(x)
    if cfg.mode is RelaxMode.SHIFTED_WINDOW:
        best = math.inf
        for i in range(max(0, j0 - cfg.left), min(m - k, j0 + cfg.right) + 1):
            acc = _sq(s, x, i, best)
            if acc < best:
                best = acc
        return math.sqrt(best)
    return math.sqrt(_subsequence_dp(s, x, j0, cfg.left, cfg.right))


def _subsequence_dp(s, x, j0, left, right) -> float:
    k, m = len(s), len(x)
    lo = max(0, j0 - left)
    hi1 = min(m - k, j0 + right)
    end = min(m - 1, j0 + k - 1 + right)
    width = end - lo + 1
    prev = []
    for w in range(width):
        if lo + w <= hi1:
            d = s[0] - x[lo + w]
            prev.append(0.0 + d * d)
        else:
            prev.append(math.inf)
    for p in range(1, k):
        run = math.inf
        cur = []
        for w in range(width):
            if run < math.inf:
                d = s[p] - x[lo + w]
                cur.append(run + d * d)
            else:
                cur.append(math.inf)
            if prev[w] < run:
                run = prev[w]
        prev = cur
    if _counter is not None:
        _counter.value += k * width
    return min(prev)


# Batch kernels. ``offsets`` are 0-based start positions, one per shapelet row.

def _check_batch(shapelets, X, offsets=None):
    S = np.atleast_2d(np.asarray(shapelets, dtype=np.float64))
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    k, m = S.shape[1], X.shape[1]
    if k > m:
        raise ShapeletLongerThanSeries(f"shapelet length {k} > series length {m}")
    if offsets is not None:
        offsets = np.asarray(offsets, dtype=np.int64)
        if offsets.shape != (S.shape[0],):
            raise LengthMismatch("one offset per shapelet required")
        if offsets.size and (offsets.min() < 0 or offsets.max() > m - k):
            raise PlacementOutOfRange("shapelet offset outside series")
    return S, X, offsets


def fixed_matrix(shapelets, offsets, X) -> np.ndarray:
    """``(N, n)`` fixed distances."""
    S, X, offsets = _check_batch(shapelets, X, offsets)
    return _backend.relaxed_matrix(S, offsets, X, 0, 0, 0)


def relaxed_matrix(shapelets, offsets, X, cfg: RelaxConfig) -> np.ndarray:
    """``(N, n)`` relaxed fixed distances."""
    S, X, offsets = _check_batch(shapelets, X, offsets)
    return _backend.relaxed_matrix(S, offsets, X, cfg.left, cfg.right, cfg.mode.code)


def sliding_min_matrix(shapelets, X) -> np.ndarray:
    """``(N, n)`` sliding-window minimum distances (shapelets of one length)."""
    S, X, _ = _check_batch(shapelets, X)
    return _backend.sliding_min_matrix(S, X)
