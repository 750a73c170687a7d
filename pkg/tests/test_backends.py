import numpy as np
import pytest

from sist import _backend

IMPLS = _backend.implementations()
needs_compiled = pytest.mark.skipif("compiled" not in IMPLS, reason="extension not built")


def _problem(rng, n=9, m=40, k=5, N=25):
    X = rng.normal(size=(n, m))
    offs = rng.integers(0, m - k + 1, size=N)
    src = rng.integers(0, n, size=N)
    S = np.ascontiguousarray([X[s, o:o + k] for s, o in zip(src, offs)]) + rng.normal(scale=0.2, size=(N, k))
    return S, offs.astype(np.int64), X


def test_selected_backend_is_known():
    assert _backend.NAME in IMPLS
    assert "python" in IMPLS


@needs_compiled
@pytest.mark.parametrize("mode", [0, 1])
@pytest.mark.parametrize("lr", [(0, 0), (3, 3), (0, 5), (7, 1)])
def test_relaxed_bitwise(rng, mode, lr):
    S, offs, X = _problem(rng)
    a = _backend.relaxed_matrix(S, offs, X, *lr, mode, impl=IMPLS["python"])
    b = _backend.relaxed_matrix(S, offs, X, *lr, mode, impl=IMPLS["compiled"])
    assert a.tobytes() == b.tobytes()


@needs_compiled
def test_sliding_min_bitwise(rng):
    S, _, X = _problem(rng, k=7)
    a = _backend.sliding_min_matrix(S, X, impl=IMPLS["python"])
    b = _backend.sliding_min_matrix(S, X, impl=IMPLS["compiled"])
    assert a.tobytes() == b.tobytes()


@needs_compiled
def test_all_lengths_bitwise(rng):
    X = rng.normal(size=(6, 30))
    a = _backend.all_lengths_sliding_min(X[2], X, 1, 30, impl=IMPLS["python"])
    b = _backend.all_lengths_sliding_min(X[2], X, 1, 30, impl=IMPLS["compiled"])
    assert a.tobytes() == b.tobytes()


@needs_compiled
def test_smo_agrees(rng):
    F = rng.normal(size=(60, 6))
    y = np.where(F[:, 0] + 0.5 * rng.normal(size=60) > 0, 1.0, -1.0)
    K = F @ F.T
    a = _backend.smo(K, y, 1.0, 1e-6, 10_000, impl=IMPLS["python"])
    b = _backend.smo(K, y, 1.0, 1e-6, 10_000, impl=IMPLS["compiled"])
    np.testing.assert_allclose(a[0], b[0], atol=1e-9)
    assert a[1] == pytest.approx(b[1], abs=1e-9)
    assert a[3][-1] == pytest.approx(b[3][-1], rel=1e-12)


def test_threads_do_not_change_results(rng):
    S, offs, X = _problem(rng, n=12, N=40)
    try:
        _backend.set_threads(1)
        one = _backend.relaxed_matrix(S, offs, X, 2, 2, 0)
        _backend.set_threads(4)
        four = _backend.relaxed_matrix(S, offs, X, 2, 2, 0)
    finally:
        _backend.set_threads(0)
    assert one.tobytes() == four.tobytes()


def test_threads_env(monkeypatch):
    monkeypatch.setenv("SIST_THREADS", "3")
    assert _backend.threads() == 3
    _backend.set_threads(2)
    try:
        assert _backend.threads() == 2
    finally:
        _backend.set_threads(0)
