"""Brute-force classic shapelet transform, used as a reference baseline.

Every subsequence with length in ``[min_len, max_len]`` is a candidate. Each
one is compared to every training series with the sliding-min distance and
scored by the information gain of its best single-threshold split. The top
``N`` become the basis; the transform uses the sliding-min distance and the
classifier is the same linear model as in :mod:`sist.pipeline`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .classifier import LinearModel, accuracy, predict, train_linear
from .dataset import ValidatedDataset
from .distance import sliding_min_matrix
from .errors import CandidateBudgetExceeded, SingleClass
from .selection import ShapeletCandidate
from .transform import FeatureMatrix

__all__ = [
    "DEFAULT_BUDGET",
    "OracleConfig",
    "OracleResult",
    "IgScoredCandidate",
    "entropy",
    "information_gain",
    "information_gain_rows",
    "count_candidates",
    "brute_force_st",
    "oracle_transform",
    "compare",
    "compare_csv_row",
    "enumerate_candidates",
    "COMPARE_HEADER",
]

DEFAULT_BUDGET = 2_000_000
COMPARE_HEADER = "dataset,n,m,acc_sist,acc_oracle,time_sist_s,time_oracle_s,cands_sist,cands_oracle"

clock = time.perf_counter


@dataclass(frozen=True)
class OracleConfig:
    min_len: int = 3
    max_len: int = 3
    N: int = 10
    budget: int = DEFAULT_BUDGET


@dataclass(frozen=True)
class IgScoredCandidate:
    candidate: ShapeletCandidate
    best_split: float
    info_gain: float


def entropy(n_neg: int, n_pos: int) -> float:
    total = n_neg + n_pos
    h = 0.0
    for c in (n_neg, n_pos):
        if c:
            p = c / total
            h -= p * math.log2(p)
    return h


def information_gain(dists, labels) -> tuple[float, float]:
    """Best single-threshold split of ``dists`` by entropy reduction, in bits.

    Thresholds are midpoints between consecutive distinct sorted values; the
    smallest one wins ties. With a single distinct value no split exists and
    the result is ``(0.0, value)``.
    """
    d = np.asarray(dists, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if d.size == 0 or d.size != y.size:
        raise ValueError("need one label per distance")
    pos = y > 0
    if pos.all() or not pos.any():
        raise SingleClass("information gain needs both classes")
    order = np.argsort(d, kind="stable")
    ds, ps = d[order], pos[order]
    n, n_pos = d.size, int(pos.sum())
    base = entropy(n - n_pos, n_pos)
    best_gain, best_thr = 0.0, float(ds[0])
    left_pos = 0
    found = False
    for i in range(n - 1):
        left_pos += int(ps[i])
        if ds[i] == ds[i + 1]:
            continue
        nl = i + 1
        nr = n - nl
        right_pos = n_pos - left_pos
        gain = base - (nl * entropy(nl - left_pos, left_pos) + nr * entropy(nr - right_pos, right_pos)) / n
        if not found or gain > best_gain:
            best_gain, best_thr, found = gain, (ds[i] + ds[i + 1]) / 2, True
    return max(best_gain, 0.0), float(best_thr)


def _h(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        q = 1.0 - p
        out = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return out


def information_gain_rows(D, labels) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`information_gain` over the rows of ``D``."""
    D = np.atleast_2d(np.asarray(D, dtype=np.float64))
    pos = np.asarray(labels).ravel() > 0
    R, n = D.shape
    if pos.all() or not pos.any():
        raise SingleClass("information gain needs both classes")
    order = np.argsort(D, axis=1, kind="stable")
    ds = np.take_along_axis(D, order, axis=1)
    cum = np.cumsum(pos[order], axis=1)[:, :-1]
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    n_pos = pos.sum()
    base = entropy(n - int(n_pos), int(n_pos))
    cond = (nl * _h(cum / nl) + nr * _h((n_pos - cum) / nr)) / n
    gains = base - cond
    valid = ds[:, :-1] != ds[:, 1:]
    gains = np.where(valid, gains, -np.inf)
    best = np.argmax(gains, axis=1)  # first maximum is the smallest threshold
    g = gains[np.arange(R), best]
    thr = (ds[np.arange(R), best] + ds[np.arange(R), best + 1]) / 2
    none = ~valid.any(axis=1)
    g = np.where(none, 0.0, np.maximum(g, 0.0))
    thr = np.where(none, ds[:, 0], thr)
    return g, thr


def count_candidates(n: int, m: int, min_len: int, max_len: int) -> int:
    return sum(n * (m - L + 1) for L in range(min_len, max_len + 1))


def enumerate_candidates(n: int, m: int, min_len: int, max_len: int):
    """``(sources, starts, lengths)`` of every candidate, starts 1-based.

    Ordered by (source, start, length), the order in which the scoring
    kernel emits distance rows.
    """
    starts, lengths = [], []
    for i in range(m):
        for L in range(min_len, max_len + 1):
            if i + L <= m:
                starts.append(i + 1)
                lengths.append(L)
    per = len(starts)
    return (
        np.repeat(np.arange(n, dtype=np.int64), per),
        np.tile(np.array(starts, dtype=np.int64), n),
        np.tile(np.array(lengths, dtype=np.int64), n),
    )


@dataclass(frozen=True, eq=False)
class OracleResult:
    shapelets: tuple[IgScoredCandidate, ...]
    features: FeatureMatrix
    linear: LinearModel
    candidates: int
    train_accuracy: float
    stage_times: dict = field(default_factory=dict)


def oracle_transform(X, shapelets) -> FeatureMatrix:
    """Sliding-min transform for a basis of mixed lengths."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    cands = [getattr(s, "candidate", s) for s in shapelets]
    out = np.empty((X.shape[0], len(cands)))
    by_len: dict[int, list[int]] = {}
    for p, c in enumerate(cands):
        by_len.setdefault(c.length, []).append(p)
    for L, cols in by_len.items():
        S = np.array([cands[p].values for p in cols], dtype=np.float64).reshape(len(cols), L)
        out[:, cols] = sliding_min_matrix(S, X).T
    refs = tuple((c.source_index, c.start_position) for c in cands)
    return FeatureMatrix(out, refs)


def brute_force_st(
    d: ValidatedDataset,
    min_len: int,
    max_len: int,
    N: int,
    budget: int = DEFAULT_BUDGET,
    reg_c: float = 1.0,
    seed: int = 42,
) -> OracleResult:
    """Enumerate, score by information gain, keep the top ``N``, transform, fit.

    Ranking is by (gain desc, source asc, start asc, length asc). Raises
    :class:`CandidateBudgetExceeded` before doing any work when the candidate
    count is above ``budget``.
    """
    if not 1 <= min_len <= max_len <= d.m:
        raise ValueError(f"need 1 <= min_len <= max_len <= {d.m}")
    if N < 1:
        raise ValueError("N must be >= 1")
    total = count_candidates(d.n, d.m, min_len, max_len)
    if total > budget:
        raise CandidateBudgetExceeded(
            f"{total} candidates exceed the budget of {budget}; raise the budget or narrow the lengths"
        )
    times = {}
    t_all = clock()

    t = clock()
    src_all, start_all, len_all = enumerate_candidates(d.n, d.m, min_len, max_len)
    times["enumerate"] = clock() - t

    t = clock()
    gains, thresholds, examined = [], [], 0
    for a in range(d.n):
        D = _backend.all_lengths_sliding_min(d.series[a], d.series, min_len, max_len)
        g, thr = information_gain_rows(D, d.y)
        gains.append(g)
        thresholds.append(thr)
        examined += D.shape[0]
    gains = np.concatenate(gains)
    thresholds = np.concatenate(thresholds)
    times["score"] = clock() - t

    t = clock()
    order = np.lexsort((len_all, start_all, src_all, -gains))[:N]
    chosen = []
    for idx in order.tolist():
        a, s, L = int(src_all[idx]), int(start_all[idx]), int(len_all[idx])
        cand = ShapeletCandidate(tuple(d.series[a, s - 1:s - 1 + L].tolist()), a, s, int(d.y[a]))
        chosen.append(IgScoredCandidate(cand, float(thresholds[idx]), float(gains[idx])))
    times["select"] = clock() - t

    t = clock()
    features = oracle_transform(d.series, chosen)
    times["transform"] = clock() - t

    t = clock()
    linear = train_linear(features, d.y, reg_c=reg_c, seed=seed, classes=d.classes)
    times["train"] = clock() - t
    times["total"] = clock() - t_all

    train_acc = accuracy(predict(linear, features).tolist(), d.y.tolist())
    return OracleResult(tuple(chosen), features, linear, examined, train_acc, times)


def compare(d_train: ValidatedDataset, d_test: ValidatedDataset, sist_hp=None,
            oracle_cfg: OracleConfig | None = None) -> dict:
    """Train and test both pipelines on the same split; one comparison row."""
    from .pipeline import Hyperparams, evaluate, train_sist

    hp = sist_hp or Hyperparams()
    cfg = oracle_cfg or OracleConfig()
    t = clock()
    model = train_sist(d_train, hp)
    time_sist = clock() - t
    acc_sist = evaluate(model, d_test).accuracy

    t = clock()
    res = brute_force_st(d_train, cfg.min_len, cfg.max_len, cfg.N, cfg.budget, hp.reg_c, hp.seed)
    time_oracle = clock() - t
    y_test = np.array([1 if tag == d_train.classes[1] else -1 for tag in d_test.labels])
    acc_oracle = accuracy(predict(res.linear, oracle_transform(d_test.series, res.shapelets)).tolist(),
                          y_test.tolist())
    return {
        "dataset": d_train.name,
        "n": d_train.n,
        "m": d_train.m,
        "acc_sist": acc_sist,
        "acc_oracle": acc_oracle,
        "time_sist_s": time_sist,
        "time_oracle_s": time_oracle,
        "cands_sist": model.candidates,
        "cands_oracle": res.candidates,
    }


def compare_csv_row(row: dict) -> str:
    vals = (row[k] for k in COMPARE_HEADER.split(","))
    return ",".join("" if v is None else repr(v) if isinstance(v, float) else str(v) for v in vals)
