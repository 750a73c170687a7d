"""Soft-margin linear classifier on the shapelet feature space.

Minimizes ``0.5 ||w||^2 + C * sum(hinge(y_i (w . f_i + b)))`` by solving
the dual with SMO (maximal-gain pair selection). The solver draws no random
numbers, so a fit is a pure function of its inputs; ``seed`` is accepted and
recorded for interface stability only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DimensionMismatch, LengthMismatch, SingleClass

__all__ = ["LinearModel", "train_linear", "decision_function", "predict", "predict_labels", "accuracy"]


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray
    bias: float
    reg_c: float
    classes: tuple[str, str] = ("-1", "+1")  # tags for -1 and +1
    center: np.ndarray | None = None  # set when trained with standardize=True
    scale: np.ndarray | None = None
    train_meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @property
    def label_map(self) -> dict[str, int]:
        return {self.classes[0]: -1, self.classes[1]: 1}


def _matrix(features) -> np.ndarray:
    data = getattr(features, "data", features)
    return np.atleast_2d(np.asarray(data, dtype=np.float64))


def train_linear(
    features,
    labels,
    reg_c: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 10_000,
    seed: int = 0,
    standardize: bool = False,
    classes: tuple[str, str] = ("-1", "+1"),
) -> LinearModel:
    """Fit on an ``(n, d)`` feature matrix and +-1 labels.

    ``max_iter`` bounds the number of epochs (``n`` SMO steps each). The dual
    objective after every epoch is kept in ``train_meta["dual_trace"]``; it
    never increases.
    """
    X = _matrix(features)
    y = np.asarray(labels, dtype=np.float64).ravel()
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} feature rows for {y.shape[0]} labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if (y > 0).all() or (y < 0).all():
        raise SingleClass("training labels contain a single class")
    if reg_c <= 0:
        raise ValueError("reg_c must be positive")

    center = scale = None
    if standardize:
        center = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        X = (X - center) / scale

    K = X @ X.T
    alpha, b, steps, trace = _backend.smo(K, y, reg_c, tol, max_iter)
    w = (alpha * y) @ X
    margins = y * (X @ w + b)
    primal = 0.5 * float(w @ w) + reg_c * float(np.maximum(0.0, 1.0 - margins).sum())
    meta = {
        "iterations": int(steps),
        "epochs": len(trace) - 1,
        "converged": bool(steps < max_iter * X.shape[0]),
        "final_objective": primal,
        "dual_trace": [float(v) for v in trace],
        "support_vectors": int((alpha > 0).sum()),
        "seed": int(seed),
        "backend": _backend.NAME,
    }
    return LinearModel(w, float(b), float(reg_c), tuple(classes), center, scale, meta)


def decision_function(model: LinearModel, features) -> np.ndarray:
    X = _matrix(features)
    if X.shape[1] != model.dim:
        raise DimensionMismatch(f"model expects {model.dim} features, got {X.shape[1]}")
    if model.center is not None:
        X = (X - model.center) / model.scale
    return X @ model.weights + model.bias


def predict(model: LinearModel, features) -> np.ndarray:
    """+-1 per row; a score of exactly 0 maps to +1."""
    return np.where(decision_function(model, features) >= 0, 1, -1).astype(np.int8)


def predict_labels(model: LinearModel, features) -> list[str]:
    return [model.classes[(v + 1) // 2] for v in predict(model, features).tolist()]


def accuracy(pred, truth) -> float:
    pred, truth = list(pred), list(truth)
    if len(pred) != len(truth):
        raise LengthMismatch(f"{len(pred)} predictions for {len(truth)} labels")
    if not pred:
        raise ValueError("empty label vectors")
    return sum(p == t for p, t in zip(pred, truth)) / len(pred)

