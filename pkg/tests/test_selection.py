import statistics

import numpy as np
import pytest

from sist.dataset import ValidatedDataset
from sist.distance import FIXED, RelaxConfig
from sist.errors import EmptyClass, LengthTooLarge
from sist.selection import (
    GRQ_EPS,
    CandidatePool,
    OverlapScope,
    ScoredPool,
    extract_candidates,
    grq,
    grq_rows,
    rank_and_select,
    score_all,
    select_indices,
)

from conftest import random_walks


def ref_grq(a, b, eps=GRQ_EPS):
    return abs(statistics.fmean(a) - statistics.fmean(b)) / (statistics.pvariance(a) + statistics.pvariance(b) + eps)


def _ds(X, y):
    labels = tuple("b" if v > 0 else "a" for v in y)
    return ValidatedDataset(np.asarray(X, dtype=float), labels, classes=("a", "b"))


@pytest.mark.parametrize("n,m,L,count", [(10, 50, 3, 480), (1, 3, 3, 1), (2, 4, 2, 6), (5, 7, 1, 35)])
def test_candidate_count(n, m, L, count):
    d = random_walks(max(n, 2), m)
    if n == 1:
        d = _ds(np.arange(3.0)[None, :].repeat(2, 0), [-1, 1]).subset([0])
    else:
        d = d.subset(range(n))
    pool = extract_candidates(d, L)
    assert len(pool) == count == n * (m - L + 1)


def test_candidate_order_and_values():
    d = _ds([[0, 1, 2, 3], [4, 5, 6, 7]], [-1, 1])
    pool = extract_candidates(d, 2)
    assert [(c.source_index, c.start_position) for c in pool] == [(0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3)]
    for c in pool:
        a = c.start_position - 1
        assert c.values == tuple(d.series[c.source_index, a:a + 2])
        assert c.class_label == d.y[c.source_index]
    assert pool[4].interval == (2, 3)


def test_candidate_length_bounds():
    d = _ds([[0, 1, 2], [3, 4, 5]], [-1, 1])
    with pytest.raises(LengthTooLarge):
        extract_candidates(d, 4)
    with pytest.raises(LengthTooLarge):
        extract_candidates(d, 0)


def test_grq_examples():
    assert grq([1, 2, 3], [3, 1, 2]) == 0.0
    assert grq([0, 2], [5, 7]) == pytest.approx(2.5, rel=1e-11)  # eps shifts it by ~1e-12
    assert grq([0, 0], [1, 1]) == pytest.approx(1 / GRQ_EPS)
    assert np.isfinite(grq([0, 0], [1, 1]))
    with pytest.raises(EmptyClass):
        grq([], [1.0])


def test_grq_matches_reference(rng):
    for _ in range(300):
        a = rng.normal(rng.normal(), rng.uniform(0.1, 3), size=rng.integers(1, 20)).tolist()
        b = rng.normal(rng.normal(), rng.uniform(0.1, 3), size=rng.integers(1, 20)).tolist()
        assert grq(a, b) == pytest.approx(ref_grq(a, b), rel=1e-12)
        assert grq(a, b) == grq(b, a)


def test_grq_rows_matches_scalar(rng):
    D = rng.normal(size=(30, 12))
    y = np.array([-1, 1] * 6)
    rows = grq_rows(D, y)
    for i in range(30):
        assert rows[i] == pytest.approx(grq(D[i, y < 0], D[i, y > 0]), rel=1e-14)


def test_grq_scale_shift(rng):
    for _ in range(200):
        a, b = rng.normal(size=7), rng.normal(1.0, 2.0, size=9)
        c = rng.choice([-1, 1]) * rng.uniform(0.2, 5)
        t = rng.normal(scale=10)
        lhs = grq(c * a + t, c * b + t, eps=0.0) * abs(c)
        assert lhs == pytest.approx(grq(a, b, eps=0.0), rel=1e-9)


def test_score_perfect_separation():
    X = np.vstack([np.zeros((3, 6)), np.ones((3, 6))])
    d = _ds(X, [-1] * 3 + [1] * 3)
    scored = score_all(d, extract_candidates(d, 2), FIXED)
    np.testing.assert_allclose(scored.grqs, np.sqrt(2) / GRQ_EPS, rtol=1e-9)
    assert set(np.unique(scored.dist)) == {0.0, np.sqrt(2)}


def test_score_shapes_and_consistency(rng):
    d = random_walks(4, 10)
    pool = extract_candidates(d, 3).take([5])
    scored = score_all(d, pool, RelaxConfig(1, 1))
    assert scored.dist.shape == (1, 4)
    sc = scored[0]
    assert sc.grq == grq(sc.dist_row[d.y < 0], sc.dist_row[d.y > 0])


def test_score_order_independent(rng):
    d = random_walks(8, 20)
    pool = extract_candidates(d, 3)
    cfg = RelaxConfig(2, 2)
    a = score_all(d, pool, cfg)
    perm = rng.permutation(len(pool))
    b = score_all(d, pool.take(perm), cfg)
    np.testing.assert_array_equal(a.grqs[perm], b.grqs)
    np.testing.assert_array_equal(a.dist[perm], b.dist)
    c = score_all(d, [pool[i] for i in perm], cfg)
    np.testing.assert_array_equal(b.grqs, c.grqs)


def _scored(starts, grqs, sources=None, L=3):
    n = len(starts)
    sources = sources or [0] * n
    pool = CandidatePool(np.zeros((n, L)), sources, starts, [1] * n)
    return ScoredPool(pool, grqs, np.zeros((n, 2)), FIXED)


def test_overlap_example():
    s = _scored([1, 2, 8], [3.0, 2.0, 1.0])
    sel = rank_and_select(s, 10, delete_overlap=True)
    assert sel.starts.tolist() == [1, 8]


def test_no_overlap_keeps_all():
    s = _scored([1, 2, 8], [3.0, 2.0, 1.0])
    assert rank_and_select(s, 10).starts.tolist() == [1, 2, 8]
    assert rank_and_select(s, 2).starts.tolist() == [1, 2]


def test_tie_break():
    s = _scored([5, 2, 9, 2], [1.0, 1.0, 1.0, 1.0], sources=[1, 1, 0, 0])
    sel = rank_and_select(s, 4)
    assert list(zip(sel.sources.tolist(), sel.starts.tolist())) == [(0, 2), (0, 9), (1, 2), (1, 5)]


def test_overlap_scopes():
    s = _scored([1, 2, 2], [3.0, 2.0, 1.0], sources=[0, 1, 0])
    assert rank_and_select(s, 5, True, OverlapScope.ANY_SERIES).starts.tolist() == [1]
    same = rank_and_select(s, 5, True, OverlapScope.SAME_SERIES)
    assert list(zip(same.sources.tolist(), same.starts.tolist())) == [(0, 1), (1, 2)]


def _ref_select(grqs, sources, starts, L, N, scope):
    order = sorted(range(len(grqs)), key=lambda i: (-grqs[i], sources[i], starts[i]))
    kept = []
    for i in order:
        iv = (starts[i], starts[i] + L - 1)
        clash = any(
            (scope == "any" or sources[j] == sources[i]) and not (iv[1] < starts[j] or starts[j] + L - 1 < iv[0])
            for j in kept
        )
        if not clash:
            kept.append(i)
        if len(kept) == N:
            break
    return kept


def test_overlap_walk_matches_reference(rng):
    for _ in range(100):
        n = int(rng.integers(1, 60))
        L = int(rng.integers(1, 6))
        starts = rng.integers(1, 30, size=n).tolist()
        sources = rng.integers(0, 4, size=n).tolist()
        grqs = rng.integers(0, 5, size=n).astype(float).tolist()
        N = int(rng.integers(1, 20))
        for scope in ("any", "same"):
            got = select_indices(grqs, sources, starts, L, N, True, scope).tolist()
            assert got == _ref_select(grqs, sources, starts, L, N, scope)


def test_kept_intervals_disjoint(rng):
    d = random_walks(10, 40)
    scored = score_all(d, extract_candidates(d, 4), RelaxConfig(1, 1))
    sel = rank_and_select(scored, 50, delete_overlap=True)
    iv = sorted(sel.intervals())
    assert all(a[1] < b[0] for a, b in zip(iv, iv[1:]))
    assert len(sel) <= 50


def test_selection_prefix_property(rng):
    d = random_walks(10, 40)
    scored = score_all(d, extract_candidates(d, 3), RelaxConfig(2, 2))
    for do in (False, True):
        big = select_indices(scored.grqs, scored.sources, scored.starts, 3, 40, do)
        small = select_indices(scored.grqs, scored.sources, scored.starts, 3, 7, do)
        np.testing.assert_array_equal(big[:7], small)


def test_rank_and_select_deterministic():
    d = random_walks(10, 30)
    scored = score_all(d, extract_candidates(d, 3), RelaxConfig(3, 3))
    a = rank_and_select(scored, 25, True)
    b = rank_and_select(scored, 25, True)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.starts.tobytes() == b.starts.tobytes()
    grqs = a.grqs
    assert all(grqs[i] >= grqs[i + 1] for i in range(len(grqs) - 1))


def test_invalid_N():
    with pytest.raises(ValueError):
        rank_and_select(_scored([1], [1.0]), 0)
