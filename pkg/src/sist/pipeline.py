"""Training, evaluation, persistence and cross-validated grid search."""

from __future__ import annotations

import itertools
import json
import math
import subprocess
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .classifier import LinearModel, accuracy, predict, train_linear
from .dataset import LabeledDataset, ValidatedDataset, stratified_kfold
from .distance import RelaxConfig, RelaxMode, relaxed_matrix
from .errors import (
    CandidateStarvation,
    CorruptModel,
    LengthMismatch,
    SchemaVersionMismatch,
    UnknownClass,
)
from .selection import (
    OverlapScope,
    ShapeletSet,
    extract_candidates,
    grq_rows,
    rank_and_select,
    score_all,
    select_indices,
)
from .transform import Metric, shapelet_transform

__all__ = [
    "Hyperparams",
    "HyperGrid",
    "TABLE1",
    "TABLE2",
    "SistModel",
    "EvalReport",
    "GridResult",
    "train_sist",
    "evaluate",
    "grid_search_cv",
    "save_model",
    "load_model",
    "ablation_report",
]

SCHEMA = "sist-model/1"
_SCHEMA_FAMILY = "sist-model/"

clock = time.perf_counter


@dataclass(frozen=True)
class Hyperparams:
    delete_overlap: bool = False
    L: int = 3
    left: int = 3
    right: int = 3
    N: int = 10
    relax_mode: RelaxMode = RelaxMode.SHIFTED_WINDOW
    overlap_scope: OverlapScope = OverlapScope.ANY_SERIES
    reg_c: float = 1.0
    seed: int = 42
    standardize: bool = False

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.left < 0 or self.right < 0:
            raise ValueError("relaxation must be non-negative")
        if not self.reg_c > 0:
            raise ValueError("reg_c must be positive")
        object.__setattr__(self, "relax_mode", RelaxMode(self.relax_mode))
        object.__setattr__(self, "overlap_scope", OverlapScope(self.overlap_scope))
        object.__setattr__(self, "reg_c", float(self.reg_c))

    @property
    def relax(self) -> RelaxConfig:
        return RelaxConfig(self.left, self.right, self.relax_mode)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["relax_mode"] = self.relax_mode.value
        d["overlap_scope"] = self.overlap_scope.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparams":
        return cls(**d)


@dataclass(frozen=True)
class HyperGrid:
    """A product lattice of hyperparameters; the remaining fields are shared."""

    delete_overlap: tuple[bool, ...] = (True, False)
    L: tuple[int, ...] = (3, 4)
    left: tuple[int, ...] = (3, 4)
    right: tuple[int, ...] = (3, 4)
    N: tuple[int, ...] = (10, 50, 100, 250, 500, 750, 1000, 1250, 1500, 2000)
    relax_mode: RelaxMode = RelaxMode.SHIFTED_WINDOW
    overlap_scope: OverlapScope = OverlapScope.ANY_SERIES
    reg_c: float = 1.0
    seed: int = 42

    def cells(self) -> list[Hyperparams]:
        return [
            Hyperparams(do, L, l, r, N, self.relax_mode, self.overlap_scope, self.reg_c, self.seed)
            for do, L, l, r, N in itertools.product(
                self.delete_overlap, self.L, self.left, self.right, self.N
            )
        ]

    def __len__(self):
        return len(self.delete_overlap) * len(self.L) * len(self.left) * len(self.right) * len(self.N)


TABLE1 = HyperGrid()

# per-dataset selections (delete_overlap, L, left, right, N)
TABLE2 = {
    "Coffee": Hyperparams(True, 3, 3, 3, 10),
    "DistalPhalanxOutlineCorrect": Hyperparams(True, 4, 4, 4, 2000),
    "Earthquakes": Hyperparams(True, 3, 3, 3, 10),
    "ECG200": Hyperparams(True, 3, 4, 3, 1500),
    "ECGFiveDays": Hyperparams(False, 3, 3, 3, 2000),
    "GunPoint": Hyperparams(False, 4, 3, 3, 1250),
    "Ham": Hyperparams(True, 3, 4, 3, 50),
    "Herring": Hyperparams(True, 4, 4, 3, 10),
    "ItalyPowerDemand": Hyperparams(False, 3, 4, 4, 100),
    "MiddlePhalanxOutlineCorrect": Hyperparams(True, 3, 4, 4, 1500),
    "MoteStrain": Hyperparams(True, 4, 3, 4, 250),
    "ProximalPhalanxOutlineCorrect": Hyperparams(True, 4, 3, 3, 2000),
    "SonyAIBORobotSurface1": Hyperparams(False, 4, 4, 3, 50),
    "SonyAIBORobotSurface2": Hyperparams(False, 3, 3, 3, 2000),
    "Strawberry": Hyperparams(False, 4, 4, 4, 1250),
    "TwoLeadECG": Hyperparams(True, 3, 4, 3, 50),
    "Wine": Hyperparams(True, 3, 3, 3, 250),
}


@dataclass(frozen=True, eq=False)
class SistModel:
    basis: ShapeletSet
    linear: LinearModel
    hyperparams: Hyperparams
    series_length: int
    train_accuracy: float
    candidates: int
    provenance: dict = field(default_factory=dict)
    stage_times: dict = field(default_factory=dict)

    @property
    def relax(self) -> RelaxConfig:
        return self.basis.config

    @property
    def classes(self) -> tuple[str, str]:
        return self.linear.classes


@dataclass(frozen=True)
class EvalReport:
    """``confusion[a][b]`` counts series of class ``classes[a]`` predicted as ``classes[b]``."""

    accuracy: float
    n_test: int
    classes: tuple[str, str]
    confusion: tuple[tuple[int, int], tuple[int, int]]
    train_time_s: float | None
    transform_time_s: float | None
    predict_time_s: float | None

    CSV_HEADER = (
        "accuracy,n_test,class_neg,class_pos,tn,fp,fn,tp,train_time_s,transform_time_s,predict_time_s"
    )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["classes"] = list(self.classes)
        d["confusion"] = [list(r) for r in self.confusion]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv_row(self) -> str:
        (tn, fp), (fn, tp) = self.confusion
        fields = [self.accuracy, self.n_test, *self.classes, tn, fp, fn, tp,
                  self.train_time_s, self.transform_time_s, self.predict_time_s]
        return ",".join("" if v is None else repr(v) if isinstance(v, float) else str(v) for v in fields)


def _builder() -> str:
    from . import __version__

    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        rev = out.stdout.strip() if out.returncode == 0 else ""
    except (OSError, subprocess.SubprocessError):
        rev = ""
    return f"sist {__version__}" + (f" ({rev})" if rev else "")


def train_sist(d: ValidatedDataset, hp: Hyperparams) -> SistModel:
    """Extract, score, select, transform, fit. Stage timings land in the model."""
    times = {}
    t_all = clock()

    t = clock()
    pool = extract_candidates(d, hp.L)
    times["extract"] = clock() - t
    if len(pool) == 0:
        raise CandidateStarvation("no candidates extracted")

    t = clock()
    scored = score_all(d, pool, hp.relax)
    times["score"] = clock() - t

    t = clock()
    basis = rank_and_select(scored, hp.N, hp.delete_overlap, hp.overlap_scope)
    times["select"] = clock() - t
    if len(basis) == 0:
        raise CandidateStarvation("no candidate survived selection")

    t = clock()
    features = shapelet_transform(d, basis)
    times["transform"] = clock() - t

    t = clock()
    linear = train_linear(features, d.y, reg_c=hp.reg_c, seed=hp.seed,
                          standardize=hp.standardize, classes=d.classes)
    times["train"] = clock() - t
    times["total"] = clock() - t_all

    train_acc = accuracy(predict(linear, features).tolist(), d.y.tolist())
    # drop the cache so the model does not pin the training data
    basis = replace(basis, dist=None, dist_source=None)
    provenance = {
        "dataset": d.name,
        "train_size": d.n,
        "builder": _builder(),
        "train_time_s": times["total"],
    }
    return SistModel(basis, linear, hp, d.m, train_acc, len(pool), provenance, times)


def _mapped_labels(model: SistModel, test: LabeledDataset) -> np.ndarray:
    known = set(model.classes)
    unknown = sorted(set(test.labels) - known)
    if unknown:
        raise UnknownClass(f"test tags {unknown} not among model classes {list(model.classes)}")
    return np.array([1 if t == model.classes[1] else -1 for t in test.labels], dtype=np.int8)


def evaluate(model: SistModel, test: LabeledDataset) -> EvalReport:
    if test.m != model.series_length:
        raise LengthMismatch(f"model expects series of length {model.series_length}, got {test.m}")
    y = _mapped_labels(model, test)
    t = clock()
    features = shapelet_transform(test.series, model.basis, Metric.RELAXED_FIXED, model.relax)
    t_transform = clock() - t
    t = clock()
    pred = predict(model.linear, features)
    t_predict = clock() - t
    conf = tuple(
        tuple(int(np.sum((y == a) & (pred == b))) for b in (-1, 1)) for a in (-1, 1)
    )
    return EvalReport(
        accuracy=accuracy(pred.tolist(), y.tolist()),
        n_test=test.n,
        classes=model.classes,
        confusion=conf,
        train_time_s=model.stage_times.get("total"),
        transform_time_s=t_transform,
        predict_time_s=t_predict,
    )


# Grid search -------------------------------------------------------------


def _tie_key(hp: Hyperparams):
    return (hp.N, hp.L, not hp.delete_overlap, hp.left + hp.right, hp.left, hp.right,
            hp.relax_mode.value, hp.overlap_scope.value, hp.reg_c, hp.standardize)


@dataclass(frozen=True)
class GridRow:
    hp: Hyperparams
    fold_accuracies: tuple[float, ...]

    @property
    def mean_accuracy(self) -> float:
        return math.fsum(self.fold_accuracies) / len(self.fold_accuracies)


@dataclass(frozen=True)
class GridResult:
    best: Hyperparams
    table: tuple[GridRow, ...]  # canonical cell order

    CSV_HEADER = "delete_overlap,L,left,right,N,relax_mode,overlap_scope,reg_c,mean_accuracy,fold_accuracies"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for row in self.table:
            hp = row.hp
            folds = ";".join(repr(a) for a in row.fold_accuracies)
            lines.append(
                f"{str(hp.delete_overlap).lower()},{hp.L},{hp.left},{hp.right},{hp.N},"
                f"{hp.relax_mode.value},{hp.overlap_scope.value},{hp.reg_c!r},"
                f"{row.mean_accuracy!r},{folds}"
            )
        return "\n".join(lines) + "\n"


def grid_search_cv(d: ValidatedDataset, grid, k: int = 10, seed: int = 42) -> GridResult:
    """Stratified ``k``-fold CV over every cell of ``grid``.

    ``grid`` is a :class:`HyperGrid` or any iterable of :class:`Hyperparams`.
    Relaxed distances are computed once per (L, l, r, mode) over the whole
    training set and sliced per fold: a candidate's distance to a series does
    not depend on the other series, so this equals training on each fold from
    scratch. The best cell has the highest mean accuracy; ties go to smaller
    N, then smaller L, delete_overlap first, then smaller l + r.
    """
    cells = grid.cells() if isinstance(grid, HyperGrid) else list(grid)
    if not cells:
        raise ValueError("empty grid")
    cells = sorted(set(cells), key=_tie_key)
    plan = stratified_kfold(d, k, seed)
    folds = list(plan)
    y = np.asarray(d.y)
    accs: dict[Hyperparams, list[float]] = {hp: [] for hp in cells}

    groups: dict[tuple, list[Hyperparams]] = {}
    for hp in cells:
        groups.setdefault((hp.L, hp.left, hp.right, hp.relax_mode), []).append(hp)

    for (L, left, right, mode), members in groups.items():
        pool = extract_candidates(d, L)
        D = relaxed_matrix(pool.values, pool.offsets, d.series, RelaxConfig(left, right, mode))
        for train_idx, test_idx in folds:
            rows = np.flatnonzero(np.isin(pool.sources, train_idx))
            D_tr = D[np.ix_(rows, train_idx)]
            grqs = grq_rows(D_tr, y[train_idx])
            by_select: dict[tuple, list[Hyperparams]] = {}
            for hp in members:
                by_select.setdefault((hp.delete_overlap, hp.overlap_scope), []).append(hp)
            for (do, scope), sel_members in by_select.items():
                n_max = max(hp.N for hp in sel_members)
                picked = rows[select_indices(grqs, pool.sources[rows], pool.starts[rows], L, n_max, do, scope)]
                F_tr = D[np.ix_(picked, train_idx)].T
                F_te = D[np.ix_(picked, test_idx)].T
                for hp in sel_members:
                    lin = train_linear(F_tr[:, : hp.N], y[train_idx], reg_c=hp.reg_c, seed=hp.seed,
                                       standardize=hp.standardize)
                    pred = predict(lin, F_te[:, : hp.N])
                    accs[hp].append(accuracy(pred.tolist(), y[test_idx].tolist()))

    table = tuple(GridRow(hp, tuple(accs[hp])) for hp in cells)
    best = min(table, key=lambda r: (-r.mean_accuracy, _tie_key(r.hp))).hp
    return GridResult(best, table)


# Persistence -------------------------------------------------------------


def _floats(a) -> list[float]:
    return [float(v) for v in np.asarray(a, dtype=np.float64).ravel()]


def save_model(model: SistModel, timestamps: bool = True) -> bytes:
    """JSON text; floats are written with ``repr`` and read back exactly.

    With ``timestamps=False`` every wall-clock field is written as null, so
    two trainings with the same inputs give byte-identical files.
    """
    b, lin = model.basis, model.linear
    meta = {k: v for k, v in lin.train_meta.items() if k != "dual_trace"}
    prov = dict(model.provenance)
    stage = dict(model.stage_times)
    if not timestamps:
        prov["train_time_s"] = None
        stage = {k: None for k in stage}
    doc = {
        "schema": SCHEMA,
        "hyperparams": model.hyperparams.to_dict(),
        "relax": {"left": b.config.left, "right": b.config.right, "mode": b.config.mode.value},
        "series_length": model.series_length,
        "classes": list(lin.classes),
        "basis": {
            "length": b.L,
            "shapelets": [
                {
                    "values": _floats(b.values[i]),
                    "source_index": int(b.sources[i]),
                    "start": int(b.starts[i]),
                    "class_label": int(b.labels[i]),
                    "grq": float(b.grqs[i]),
                }
                for i in range(len(b))
            ],
        },
        "linear": {
            "weights": _floats(lin.weights),
            "bias": float(lin.bias),
            "reg_c": float(lin.reg_c),
            "center": None if lin.center is None else _floats(lin.center),
            "scale": None if lin.scale is None else _floats(lin.scale),
            "meta": meta,
        },
        "training": {
            "accuracy": model.train_accuracy,
            "candidates": model.candidates,
            "selected": len(b),
            "stage_times_s": stage,
        },
        "provenance": prov,
    }
    return (json.dumps(doc, indent=1, allow_nan=False) + "\n").encode("utf-8")


def load_model(data: bytes | str) -> SistModel:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptModel(f"model file is not UTF-8: {exc}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"model file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("schema"), str):
        raise CorruptModel("missing schema tag")
    if doc["schema"] != SCHEMA:
        if doc["schema"].startswith(_SCHEMA_FAMILY):
            raise SchemaVersionMismatch(f"cannot read {doc['schema']!r}; this reader supports {SCHEMA!r}")
        raise CorruptModel(f"unknown schema {doc['schema']!r}")
    try:
        hp = Hyperparams.from_dict(doc["hyperparams"])
        rel = doc["relax"]
        cfg = RelaxConfig(rel["left"], rel["right"], RelaxMode(rel["mode"]))
        L = int(doc["basis"]["length"])
        shp = doc["basis"]["shapelets"]
        if not shp:
            raise CorruptModel("model has an empty basis")
        values = np.array([s["values"] for s in shp], dtype=np.float64).reshape(len(shp), L)
        basis = ShapeletSet(
            values=values,
            sources=np.array([s["source_index"] for s in shp], dtype=np.int64),
            starts=np.array([s["start"] for s in shp], dtype=np.int64),
            labels=np.array([s["class_label"] for s in shp], dtype=np.int8),
            grqs=np.array([s["grq"] for s in shp], dtype=np.float64),
            config=cfg,
        )
        lin_doc = doc["linear"]
        weights = np.array(lin_doc["weights"], dtype=np.float64)
        if weights.shape != (len(shp),):
            raise CorruptModel(f"{weights.size} weights for {len(shp)} shapelets")
        center = None if lin_doc["center"] is None else np.array(lin_doc["center"], dtype=np.float64)
        scale = None if lin_doc["scale"] is None else np.array(lin_doc["scale"], dtype=np.float64)
        classes = tuple(str(c) for c in doc["classes"])
        if len(classes) != 2:
            raise CorruptModel("model must name exactly two classes")
        linear = LinearModel(weights, float(lin_doc["bias"]), float(lin_doc["reg_c"]), classes,
                             center, scale, dict(lin_doc["meta"]))
        tr = doc["training"]
        stage = dict(tr["stage_times_s"])
        return SistModel(
            basis, linear, hp, int(doc["series_length"]), float(tr["accuracy"]),
            int(tr["candidates"]), dict(doc["provenance"]), stage,
        )
    except CorruptModel:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"malformed model file: {exc!r}") from None


# Ablation ----------------------------------------------------------------


@dataclass(frozen=True)
class AblationReport:
    """Training time split into shapelet work and classifier fitting."""

    sist_shapelet_s: float
    sist_classifier_s: float
    sist_total_s: float
    oracle_shapelet_s: float
    oracle_classifier_s: float
    oracle_total_s: float

    @staticmethod
    def _share(part, total):
        return part / total if total > 0 else 0.0

    def proportions(self) -> dict[str, float]:
        return {
            "sist_shapelet": self._share(self.sist_shapelet_s, self.sist_total_s),
            "sist_classifier": self._share(self.sist_classifier_s, self.sist_total_s),
            "oracle_shapelet": self._share(self.oracle_shapelet_s, self.oracle_total_s),
            "oracle_classifier": self._share(self.oracle_classifier_s, self.oracle_total_s),
        }

    CSV_HEADER = ("sist_shapelet_s,sist_classifier_s,sist_total_s,"
                  "oracle_shapelet_s,oracle_classifier_s,oracle_total_s")

    def to_csv_row(self) -> str:
        return ",".join(repr(float(v)) for v in asdict(self).values())


def ablation_report(d_train: ValidatedDataset, d_test, hp: Hyperparams, oracle_cfg=None) -> AblationReport:
    """Time both pipelines on ``d_train``; ``d_test`` is only used for a sanity evaluation."""
    from .oracle import OracleConfig, brute_force_st

    oracle_cfg = oracle_cfg or OracleConfig(min_len=hp.L, max_len=hp.L, N=hp.N)
    model = train_sist(d_train, hp)
    st = model.stage_times
    ores = brute_force_st(d_train, oracle_cfg.min_len, oracle_cfg.max_len, oracle_cfg.N,
                          budget=oracle_cfg.budget, reg_c=hp.reg_c, seed=hp.seed)
    if d_test is not None:
        evaluate(model, d_test)
    ot = ores.stage_times
    return AblationReport(
        sist_shapelet_s=st["extract"] + st["score"] + st["select"] + st["transform"],
        sist_classifier_s=st["train"],
        sist_total_s=st["total"],
        oracle_shapelet_s=ot["enumerate"] + ot["score"] + ot["select"] + ot["transform"],
        oracle_classifier_s=ot["train"],
        oracle_total_s=ot["total"],
    )
