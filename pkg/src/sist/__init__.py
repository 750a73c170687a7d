"""Short isometric shapelet transform for binary time-series classification."""

__version__ = "0.1.0"

from ._backend import NAME as BACKEND, set_threads
from .classifier import LinearModel, accuracy, predict, train_linear
from .dataset import (
    LabeledDataset,
    ValidatedDataset,
    load_ucr,
    parse_ucr_tsv,
    stratified_kfold,
    validate_binary_isometric,
)
from .distance import (
    Placement,
    RelaxConfig,
    RelaxMode,
    euclidean,
    fixed_distance,
    relaxed_fixed_distance,
    sliding_min_distance,
)
from .errors import SistError
from .pipeline import (
    TABLE1,
    TABLE2,
    EvalReport,
    HyperGrid,
    Hyperparams,
    SistModel,
    evaluate,
    grid_search_cv,
    load_model,
    save_model,
    train_sist,
)
from .selection import OverlapScope, extract_candidates, grq, rank_and_select, score_all
from .transform import Metric, shapelet_transform

__all__ = [
    "BACKEND",
    "set_threads",
    "LinearModel",
    "accuracy",
    "predict",
    "train_linear",
    "LabeledDataset",
    "ValidatedDataset",
    "load_ucr",
    "parse_ucr_tsv",
    "stratified_kfold",
    "validate_binary_isometric",
    "Placement",
    "RelaxConfig",
    "RelaxMode",
    "euclidean",
    "fixed_distance",
    "relaxed_fixed_distance",
    "sliding_min_distance",
    "SistError",
    "TABLE1",
    "TABLE2",
    "EvalReport",
    "HyperGrid",
    "Hyperparams",
    "SistModel",
    "evaluate",
    "grid_search_cv",
    "load_model",
    "save_model",
    "train_sist",
    "OverlapScope",
    "extract_candidates",
    "grq",
    "rank_and_select",
    "score_all",
    "Metric",
    "shapelet_transform",
]
