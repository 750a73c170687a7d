import numpy as np
import pytest

from sist.classifier import LinearModel, accuracy, decision_function, predict, predict_labels, train_linear
from sist.errors import DimensionMismatch, LengthMismatch, SingleClass


def _perceptron_separable(X, y, epochs=2000):
    """True when a plain perceptron (with bias) finds a separating hyperplane."""
    Xb = np.hstack([X, np.ones((len(X), 1))])
    w = np.zeros(Xb.shape[1])
    for _ in range(epochs):
        mistakes = 0
        for xi, yi in zip(Xb, y):
            if yi * (xi @ w) <= 0:
                w += yi * xi
                mistakes += 1
        if not mistakes:
            return True
    return False


def test_separable_1d():
    X = np.array([[0.0], [0.1], [1.0], [1.1]])
    y = np.array([-1, -1, 1, 1])
    m = train_linear(X, y, reg_c=100.0)
    assert predict(m, X).tolist() == y.tolist()
    thr = -m.bias / m.weights[0]
    assert 0.1 < thr < 1.0


def test_deterministic():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 4))
    y = np.where(X[:, 1] > 0, 1, -1)
    a, b = train_linear(X, y, seed=1), train_linear(X, y, seed=99)
    assert a.weights.tobytes() == b.weights.tobytes()
    assert a.bias == b.bias


def test_xor_not_linearly_separable():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([-1, -1, 1, 1])
    m = train_linear(X, y, reg_c=10.0)
    assert accuracy(predict(m, X), y) <= 0.75


def test_zero_score_maps_to_positive():
    m = LinearModel(np.zeros(3), 0.0, 1.0)
    assert predict(m, np.random.default_rng(0).normal(size=(5, 3))).tolist() == [1] * 5
    m = LinearModel(np.array([1.0]), -2.0, 1.0, classes=("neg", "pos"))
    assert predict(m, [[2.0], [1.0]]).tolist() == [1, -1]
    assert predict_labels(m, [[2.0], [1.0]]) == ["pos", "neg"]


def test_accuracy_examples():
    assert accuracy([1, 1, -1, -1], [1, -1, -1, -1]) == 0.75
    assert accuracy(["a"], ["a"]) == 1.0
    with pytest.raises(LengthMismatch):
        accuracy([1], [1, 1])
    with pytest.raises(ValueError):
        accuracy([], [])


def test_errors():
    with pytest.raises(SingleClass):
        train_linear([[0.0], [1.0]], [1, 1])
    with pytest.raises(DimensionMismatch):
        train_linear([[0.0], [1.0]], [1, -1, 1])
    with pytest.raises(ValueError):
        train_linear([[0.0], [1.0]], [1, -1], reg_c=0.0)
    with pytest.raises(ValueError):
        train_linear([[0.0], [1.0]], [1, 0])
    m = train_linear([[0.0, 1.0], [1.0, 0.0]], [1, -1])
    with pytest.raises(DimensionMismatch):
        decision_function(m, [[1.0, 2.0, 3.0]])


def test_dual_trace_monotone_and_gap(rng):
    for _ in range(10):
        X = rng.normal(size=(50, 5))
        y = np.where(X @ rng.normal(size=5) + 0.5 * rng.normal(size=50) > 0, 1, -1)
        if abs(y.sum()) == 50:
            continue
        m = train_linear(X, y, reg_c=float(rng.choice([0.1, 1.0, 10.0])))
        trace = m.train_meta["dual_trace"]
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
        primal = m.train_meta["final_objective"]
        # weak duality holds at any feasible point; a small gap certifies optimality
        assert primal + trace[-1] >= -1e-9
        assert primal + trace[-1] <= 1e-3 * max(1.0, primal)


def test_positive_scaling_invariance(rng):
    X = rng.normal(size=(40, 3))
    y = np.where(X[:, 0] - X[:, 2] > 0, 1, -1)
    base = predict(train_linear(X, y, reg_c=1.0), X)
    for c in (0.5, 3.0):
        # scaling features by c and C by 1/c^2 rescales the problem exactly
        m = train_linear(c * X, y, reg_c=1.0 / c**2)
        assert predict(m, c * X).tolist() == base.tolist()


def test_separable_large_c(rng):
    for trial in range(10):
        X = rng.normal(size=(30, 3))
        w = rng.normal(size=3)
        s = X @ w
        keep = np.abs(s) > 0.3
        X, y = X[keep], np.where(s[keep] > 0, 1, -1)
        if abs(y.sum()) == len(y):
            continue
        assert _perceptron_separable(X, y)
        m = train_linear(X, y, reg_c=1e4, max_iter=50_000)
        assert accuracy(predict(m, X), y) == 1.0


def test_standardize():
    X = np.array([[0.0, 1000.0], [0.1, 1000.0], [1.0, 1000.0], [1.1, 1000.0]])
    y = np.array([-1, -1, 1, 1])
    m = train_linear(X, y, reg_c=10.0, standardize=True)
    assert m.center is not None and m.scale[1] == 1.0
    assert predict(m, X).tolist() == y.tolist()


def test_accepts_feature_matrix_like():
    class F:
        data = np.array([[0.0], [1.0]])

    m = train_linear(F(), [-1, 1], reg_c=10.0)
    assert predict(m, F()).tolist() == [-1, 1]
