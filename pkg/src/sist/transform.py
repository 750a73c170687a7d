"""Shapelet transform and n-cut sets.

The transform maps each series to the vector of its distances to a basis of
shapelets. Under the fixed distance, replacing a shapelet by any partition of
it into contiguous pieces (an n-cut set) leaves the norm of every
transformed vector unchanged; :func:`check_norm_invariance` and
:func:`check_basis_substitution` compute both sides of that identity.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from .dataset import LabeledDataset
from .distance import (
    Placement,
    RelaxConfig,
    fixed_distance,
    fixed_matrix,
    relaxed_matrix,
    sliding_min_distance,
    sliding_min_matrix,
)
from .errors import InvalidCutPoints, MetricPlacementMismatch
from .selection import ShapeletCandidate, ShapeletSet

__all__ = [
    "Metric",
    "FeatureMatrix",
    "CutSet",
    "shapelet_transform",
    "cut_set",
    "check_norm_invariance",
    "check_basis_substitution",
]


class Metric(str, enum.Enum):
    FIXED = "fixed"
    RELAXED_FIXED = "relaxed"
    SLIDING_MIN = "sliding"


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """``data[i, p]`` is the distance from series ``i`` to shapelet ``p``."""

    data: np.ndarray
    shapelet_refs: tuple[tuple[int, int], ...]  # (source_index, start_position)
    reused_cache: bool = False

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def to_csv(self, labels=None) -> str:
        """CSV with header ``series_id,label,f1..fN``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["series_id", "label", *(f"f{p + 1}" for p in range(self.cols))])
        for i, row in enumerate(self.data):
            label = "" if labels is None else labels[i]
            w.writerow([i, label, *(repr(float(v)) for v in row)])
        return buf.getvalue()


def _series(d) -> np.ndarray:
    if isinstance(d, LabeledDataset):
        return d.series
    return np.atleast_2d(np.asarray(d, dtype=np.float64))


def shapelet_transform(d, basis: ShapeletSet, metric: Metric = Metric.RELAXED_FIXED,
                       cfg: RelaxConfig | None = None) -> FeatureMatrix:
    """Transform every series of ``d`` through ``basis``.

    ``cfg`` defaults to the basis' own relax config. When the basis carries
    cached distance rows for this very dataset and config, they are returned
    as-is and no distance is computed.
    """
    if len(basis) == 0:
        raise ValueError("empty shapelet basis")
    metric = Metric(metric)
    cfg = basis.config if cfg is None else cfg
    X = _series(d)
    refs = tuple(zip(basis.sources.tolist(), basis.starts.tolist()))
    if metric is not Metric.SLIDING_MIN:
        if basis.L > X.shape[1] or int(basis.starts.max()) + basis.L - 1 > X.shape[1]:
            raise MetricPlacementMismatch(
                f"basis placements need series of length >= {int(basis.starts.max()) + basis.L - 1}"
            )
    if (
        metric is Metric.RELAXED_FIXED
        and basis.dist is not None
        and basis.dist_source is d
        and cfg == basis.config
    ):
        return FeatureMatrix(np.ascontiguousarray(basis.dist.T), refs, reused_cache=True)
    if metric is Metric.SLIDING_MIN:
        D = sliding_min_matrix(basis.values, X)
    elif metric is Metric.FIXED:
        D = fixed_matrix(basis.values, basis.offsets, X)
    else:
        D = relaxed_matrix(basis.values, basis.offsets, X, cfg)
    return FeatureMatrix(np.ascontiguousarray(D.T), refs)


@dataclass(frozen=True)
class CutSet:
    parent: ShapeletCandidate
    pieces: tuple[ShapeletCandidate, ...]
    cut_points: tuple[int, ...]


def cut_set(s: ShapeletCandidate, cut_points) -> CutSet:
    """Split ``s`` before each 0-based offset in ``cut_points``.

    Pieces keep absolute positions: a piece starting at offset ``c`` of the
    parent has start ``s.start_position + c``. An empty ``cut_points`` gives
    the trivial one-piece set.
    """
    cuts = tuple(int(c) for c in cut_points)
    k = len(s.values)
    if any(c <= 0 or c >= k for c in cuts) or any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise InvalidCutPoints(f"cut points {cuts} must be strictly increasing inside (0, {k})")
    bounds = (0, *cuts, k)
    pieces = tuple(
        ShapeletCandidate(
            tuple(s.values[a:b]), s.source_index, s.start_position + a, s.class_label
        )
        for a, b in zip(bounds, bounds[1:])
    )
    return CutSet(s, pieces, cuts)


def _distance(metric: Metric, s: ShapeletCandidate, x) -> float:
    if metric is Metric.SLIDING_MIN:
        return sliding_min_distance(s.values, x)
    return fixed_distance(s.values, Placement(s.source_index, s.start_position, len(s.values)), x)


def _norm(values) -> float:
    return math.sqrt(math.fsum(v * v for v in values))


def check_norm_invariance(x, s: ShapeletCandidate, cuts, metric: Metric = Metric.FIXED):
    """Norms of ``x`` transformed through ``{s}`` and through ``cut_set(s, cuts)``."""
    metric = Metric(metric)
    whole = _distance(metric, s, x)
    pieces = [_distance(metric, p, x) for p in cut_set(s, cuts).pieces]
    return abs(whole), _norm(pieces)


def check_basis_substitution(d, basis, subset, cuts, metric: Metric = Metric.FIXED):
    """Per-series norms through basis ``C`` and through ``F = (C - D) + cut sets of D``.

    ``subset`` holds indices into ``basis``; ``cuts`` maps each of them to
    its cut points.
    """
    metric = Metric(metric)
    basis = list(basis)
    subset = [int(i) for i in subset]
    if not set(subset) <= set(range(len(basis))):
        raise IndexError("subset must index into the basis")
    F = [s for i, s in enumerate(basis) if i not in set(subset)]
    for i in subset:
        F.extend(cut_set(basis[i], cuts[i]).pieces)
    out = []
    for x in _series(d):
        norm_c = _norm([_distance(metric, s, x) for s in basis])
        norm_f = _norm([_distance(metric, s, x) for s in F])
        out.append((norm_c, norm_f))
    return out

