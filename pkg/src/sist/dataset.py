"""Labeled time-series datasets in the UCR text layout.

One series per line, class tag first, then the samples. Tabs, commas and
runs of whitespace are all accepted as separators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    EmptyInput,
    NonFiniteValue,
    NonNumericValue,
    NotBinary,
    RaggedLengths,
    TooFewPerClass,
)

__all__ = [
    "LabeledDataset",
    "ValidatedDataset",
    "FoldPlan",
    "parse_ucr_tsv",
    "serialize_ucr_tsv",
    "load_ucr",
    "validate_binary_isometric",
    "znormalize",
    "stratified_kfold",
]

_SPLIT = re.compile(r"[,\s]+")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Equal-length series with one class tag each.

    ``series`` is an ``(n, m)`` float64 array (read-only); ``labels`` keeps
    the tags as strings, in file order.
    """

    series: np.ndarray
    labels: tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "series", _frozen(self.series))
        object.__setattr__(self, "labels", tuple(str(t) for t in self.labels))
        if self.series.ndim != 2:
            raise RaggedLengths("series must form an (n, m) array")
        if len(self.labels) != self.series.shape[0]:
            raise ValueError(
                f"{len(self.labels)} labels for {self.series.shape[0]} series"
            )

    @property
    def n(self) -> int:
        return self.series.shape[0]

    @property
    def m(self) -> int:
        return self.series.shape[1]

    @property
    def class_set(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels)))

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.series.shape == other.series.shape
            and bool(np.array_equal(self.series, other.series))
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ValidatedDataset(LabeledDataset):
    """Binary, isometric, finite dataset with a canonical label map.

    ``classes[0]`` (the lexicographically smaller tag) maps to -1 and
    ``classes[1]`` to +1; ``y`` holds the mapped labels as an int8 array.
    """

    classes: tuple[str, str] = ("", "")
    y: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        super().__post_init__()
        y = np.array([1 if t == self.classes[1] else -1 for t in self.labels], dtype=np.int8)
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def label_map(self) -> dict[str, int]:
        return {self.classes[0]: -1, self.classes[1]: 1}

    def subset(self, idx) -> "ValidatedDataset":
        idx = np.asarray(idx, dtype=np.intp)
        return ValidatedDataset(
            self.series[idx],
            tuple(self.labels[i] for i in idx),
            name=self.name,
            classes=self.classes,
        )


def parse_ucr_tsv(text: str, name: str = "") -> LabeledDataset:
    """Parse UCR-style text. Row order is preserved; tags stay strings.

    More than two classes is not an error here; see
    :func:`validate_binary_isometric`.
    """
    labels = []
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        tokens = _SPLIT.split(line)
        labels.append(tokens[0])
        try:
            rows.append([float(v) for v in tokens[1:]])
        except ValueError as exc:
            raise NonNumericValue(f"line {lineno}: {exc}") from None
    if not rows:
        raise EmptyInput("no series found")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise RaggedLengths(f"series lengths differ: {sorted(lengths)}")
    if 0 in lengths:
        raise EmptyInput("series have no values")
    return LabeledDataset(np.array(rows, dtype=np.float64), tuple(labels), name=name)


def serialize_ucr_tsv(d: LabeledDataset) -> str:
    """Inverse of :func:`parse_ucr_tsv` (tab separated, round-trip floats)."""
    out = []
    for tag, row in zip(d.labels, d.series):
        out.append("\t".join([tag, *(repr(float(v)) for v in row)]))
    return "\n".join(out) + "\n"


def load_ucr(path, validate: bool = True, znorm: bool = False):
    """Read a ``<Name>_TRAIN.tsv``-style file.

    Raises ``FileNotFoundError`` if the path does not exist.
    """
    path = Path(path)
    name = path.stem
    for suffix in ("_TRAIN", "_TEST"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
    d = parse_ucr_tsv(path.read_text(), name=name)
    if znorm:
        d = znormalize(d)
    return validate_binary_isometric(d) if validate else d


def validate_binary_isometric(d: LabeledDataset) -> ValidatedDataset:
    """Check the dataset is binary, isometric and finite; attach the label map.

    Idempotent: validating a ``ValidatedDataset`` returns an equal one.
    """
    if d.series.ndim != 2:
        raise RaggedLengths("series must form an (n, m) array")
    if not np.all(np.isfinite(d.series)):
        bad = np.argwhere(~np.isfinite(d.series))[0]
        raise NonFiniteValue(f"non-finite value in series {bad[0]} at position {bad[1]}")
    classes = d.class_set
    if len(classes) != 2:
        raise NotBinary(f"expected exactly 2 classes, found {len(classes)}: {classes}")
    return ValidatedDataset(d.series, d.labels, name=d.name, classes=(classes[0], classes[1]))


def znormalize(d: LabeledDataset) -> LabeledDataset:
    """Per-series zero mean, unit variance. Constant series become all zeros."""
    x = np.array(d.series)
    mu = x.mean(axis=1, keepdims=True)
    sd = x.std(axis=1, keepdims=True)
    sd[sd == 0] = 1.0
    x = (x - mu) / sd
    if isinstance(d, ValidatedDataset):
        return ValidatedDataset(x, d.labels, name=d.name, classes=d.classes)
    return LabeledDataset(x, d.labels, name=d.name)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: tuple[int, ...]
    seed: int

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(train_idx, test_idx)`` for one fold."""
        a = np.asarray(self.assignments)
        return np.flatnonzero(a != fold), np.flatnonzero(a == fold)

    def __iter__(self):
        for f in range(self.k):
            yield self.split(f)


def stratified_kfold(d: ValidatedDataset, k: int, seed: int) -> FoldPlan:
    """Deterministic stratified fold assignment.

    Members of each class are shuffled with ``seed`` and dealt round-robin,
    so every fold holds ``floor`` or ``ceil`` of ``n_c / k`` of class ``c``.
    The second class starts dealing where the first stopped, which keeps
    total fold sizes within one of each other as well.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    y = np.asarray(d.y)
    rng = np.random.default_rng(seed)
    assignments = np.full(d.n, -1, dtype=np.int64)
    offset = 0
    for label in (-1, 1):
        members = np.flatnonzero(y == label)
        if members.size < k:
            raise TooFewPerClass(
                f"class {d.classes[(label + 1) // 2]!r} has {members.size} members, need >= {k}"
            )
        members = members[rng.permutation(members.size)]
        assignments[members] = (np.arange(members.size) + offset) % k
        offset = (offset + members.size) % k
    return FoldPlan(k=k, assignments=tuple(int(a) for a in assignments), seed=seed)


def fold_balance_ok(d: ValidatedDataset, plan: FoldPlan) -> bool:
    """True when each fold's per-class count is within 1 of ``n_c / k``."""
    a = np.asarray(plan.assignments)
    for label in (-1, 1):
        in_class = d.y == label
        ideal = in_class.sum() / plan.k
        for f in range(plan.k):
            if abs(int(np.sum((a == f) & in_class)) - ideal) > 1:
                return False
    return True
