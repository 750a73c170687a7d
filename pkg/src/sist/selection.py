"""Candidate extraction, generalized Rayleigh quotient scoring and ranking."""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .dataset import ValidatedDataset
from .distance import RelaxConfig, relaxed_matrix
from .errors import EmptyClass, LengthTooLarge

__all__ = [
    "GRQ_EPS",
    "OverlapScope",
    "ShapeletCandidate",
    "ScoredCandidate",
    "CandidatePool",
    "ScoredPool",
    "ShapeletSet",
    "extract_candidates",
    "grq",
    "grq_rows",
    "score_all",
    "priority_order",
    "select_indices",
    "rank_and_select",
]

GRQ_EPS = 1e-12


class OverlapScope(str, enum.Enum):
    ANY_SERIES = "any"
    SAME_SERIES = "same"


@dataclass(frozen=True)
class ShapeletCandidate:
    values: tuple[float, ...]
    source_index: int
    start_position: int  # 1-based
    class_label: int

    @property
    def length(self) -> int:
        return len(self.values)

    @property
    def interval(self) -> tuple[int, int]:
        return self.start_position, self.start_position + len(self.values) - 1


@dataclass(frozen=True)
class ScoredCandidate:
    candidate: ShapeletCandidate
    grq: float
    dist_row: np.ndarray = field(repr=False, compare=False)


class CandidatePool(Sequence):
    """All length-``L`` windows of a dataset, stored column-wise.

    Indexing yields :class:`ShapeletCandidate` objects; the arrays are what
    the kernels consume.
    """

    def __init__(self, values, sources, starts, labels):
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self.sources = np.asarray(sources, dtype=np.int64)
        self.starts = np.asarray(starts, dtype=np.int64)  # 1-based
        self.labels = np.asarray(labels, dtype=np.int8)

    @property
    def L(self) -> int:
        return self.values.shape[1]

    @property
    def offsets(self) -> np.ndarray:
        return self.starts - 1

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return ShapeletCandidate(
            tuple(self.values[i].tolist()),
            int(self.sources[i]),
            int(self.starts[i]),
            int(self.labels[i]),
        )

    def take(self, idx) -> "CandidatePool":
        idx = np.asarray(idx, dtype=np.intp)
        return CandidatePool(self.values[idx], self.sources[idx], self.starts[idx], self.labels[idx])

    @classmethod
    def from_candidates(cls, cands) -> "CandidatePool":
        cands = list(cands)
        if not cands:
            raise ValueError("no candidates")
        return cls(
            [c.values for c in cands],
            [c.source_index for c in cands],
            [c.start_position for c in cands],
            [c.class_label for c in cands],
        )


def extract_candidates(d: ValidatedDataset, L: int) -> CandidatePool:
    """Every window of length ``L`` of every series, step 1.

    Ordered by ``(source_index, start_position)``; exactly
    ``n * (m - L + 1)`` candidates.
    """
    if L < 1 or L > d.m:
        raise LengthTooLarge(f"shapelet length {L} outside [1, {d.m}]")
    P = d.m - L + 1
    values = sliding_window_view(d.series, L, axis=1).reshape(d.n * P, L)
    sources = np.repeat(np.arange(d.n), P)
    starts = np.tile(np.arange(1, P + 1), d.n)
    labels = np.repeat(np.asarray(d.y), P)
    return CandidatePool(values, sources, starts, labels)


def grq_rows(D: np.ndarray, y: np.ndarray, eps: float = GRQ_EPS) -> np.ndarray:
    """Row-wise GRQ of a distance matrix split into classes by ``y`` (+-1).

    ``|mean(A) - mean(B)| / (var(A) + var(B) + eps)``, population variances.
    """
    D = np.atleast_2d(np.asarray(D, dtype=np.float64))
    y = np.asarray(y)
    A = np.ascontiguousarray(D[:, y < 0])
    B = np.ascontiguousarray(D[:, y > 0])
    if A.shape[1] == 0 or B.shape[1] == 0:
        raise EmptyClass("both classes need at least one distance")
    num = np.abs(A.mean(axis=1) - B.mean(axis=1))
    return num / (A.var(axis=1) + B.var(axis=1) + eps)


def grq(class_a_dists, class_b_dists, eps: float = GRQ_EPS) -> float:
    """Generalized Rayleigh quotient of two 1-D samples."""
    a = np.asarray(class_a_dists, dtype=np.float64).ravel()
    b = np.asarray(class_b_dists, dtype=np.float64).ravel()
    y = np.concatenate([-np.ones(a.size), np.ones(b.size)])
    return float(grq_rows(np.concatenate([a, b])[None, :], y, eps)[0])


class ScoredPool(CandidatePool):
    """Candidates with their GRQ and cached distance rows (``(C, n)``).

    ``dist`` rows are the relaxed fixed distances to every training series
    under ``config``; the transform reuses them instead of recomputing.
    """

    def __init__(self, pool: CandidatePool, grqs, dist, config: RelaxConfig, dist_source=None):
        super().__init__(pool.values, pool.sources, pool.starts, pool.labels)
        self.grqs = np.asarray(grqs, dtype=np.float64)
        self.dist = np.asarray(dist, dtype=np.float64)
        self.config = config
        self.dist_source = dist_source

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return ScoredCandidate(super().__getitem__(i), float(self.grqs[i]), self.dist[i])

    def take(self, idx) -> "ScoredPool":
        idx = np.asarray(idx, dtype=np.intp)
        return ScoredPool(super().take(idx), self.grqs[idx], self.dist[idx], self.config, self.dist_source)


def score_all(d: ValidatedDataset, candidates, cfg: RelaxConfig) -> ScoredPool:
    """Relaxed fixed distance of each candidate to every series, then GRQ."""
    pool = candidates if isinstance(candidates, CandidatePool) else CandidatePool.from_candidates(candidates)
    D = relaxed_matrix(pool.values, pool.offsets, d.series, cfg)
    return ScoredPool(pool, grq_rows(D, d.y), D, cfg, dist_source=d)


def priority_order(grqs, sources, starts) -> np.ndarray:
    """Indices sorted by (grq desc, source asc, start asc)."""
    return np.lexsort((starts, sources, -np.asarray(grqs)))


@dataclass(frozen=True, eq=False)
class ShapeletSet:
    """Selected shapelets in priority order, with their cached distance rows."""

    values: np.ndarray
    sources: np.ndarray
    starts: np.ndarray  # 1-based
    labels: np.ndarray
    grqs: np.ndarray
    config: RelaxConfig
    dist: np.ndarray | None = None  # (N_sel, n_train) cached rows, or None
    dist_source: object = None  # dataset the cached rows were computed on

    @property
    def L(self) -> int:
        return self.values.shape[1]

    @property
    def offsets(self) -> np.ndarray:
        return self.starts - 1

    def __len__(self):
        return self.values.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield ShapeletCandidate(
                tuple(self.values[i].tolist()), int(self.sources[i]), int(self.starts[i]), int(self.labels[i])
            )

    def intervals(self) -> list[tuple[int, int]]:
        return [(int(s), int(s) + self.L - 1) for s in self.starts]


def select_indices(
    grqs,
    sources,
    starts,
    L: int,
    N: int,
    delete_overlap: bool = False,
    overlap_scope: OverlapScope = OverlapScope.ANY_SERIES,
) -> np.ndarray:
    """Indices of the kept candidates, in priority order.

    The walk is greedy and stops at ``N``, so the result for a smaller ``N``
    is always a prefix of the result for a larger one.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    sources = np.asarray(sources, dtype=np.int64)
    starts = np.asarray(starts, dtype=np.int64)
    order = priority_order(grqs, sources, starts)
    if not delete_overlap:
        return order[:N]
    scope = OverlapScope(overlap_scope)
    keys = np.zeros(len(order), dtype=np.int64) if scope is OverlapScope.ANY_SERIES else sources[order]
    starts = starts[order]
    # candidates sharing a key and start after the first one are always rejected
    span = int(starts.max()) + L + 1 if len(order) else 1
    _, first = np.unique(keys * span + starts, return_index=True)
    first.sort()
    taken: dict[int, list[bool]] = {}
    kept = []
    for pos in first.tolist():
        key = int(keys[pos])
        occ = taken.setdefault(key, [False] * span)
        a = int(starts[pos])
        if any(occ[a:a + L]):
            continue
        occ[a:a + L] = [True] * L
        kept.append(order[pos])
        if len(kept) == N:
            break
    return np.asarray(kept, dtype=np.intp)


def rank_and_select(
    scored: ScoredPool,
    N: int,
    delete_overlap: bool = False,
    overlap_scope: OverlapScope = OverlapScope.ANY_SERIES,
) -> ShapeletSet:
    """Sort by priority, optionally drop overlapping candidates, keep at most ``N``.

    With ``delete_overlap`` the walk goes in priority order and drops any
    candidate whose interval meets an already-kept one (across all series
    for ``ANY_SERIES``, within its own series for ``SAME_SERIES``), so fewer
    than ``N`` may remain.
    """
    idx = select_indices(scored.grqs, scored.sources, scored.starts, scored.L, N,
                         delete_overlap, overlap_scope)
    sel = scored.take(idx)
    return ShapeletSet(
        values=sel.values,
        sources=sel.sources,
        starts=sel.starts,
        labels=sel.labels,
        grqs=sel.grqs,
        config=scored.config,
        dist=sel.dist,
        dist_source=scored.dist_source,
    )
