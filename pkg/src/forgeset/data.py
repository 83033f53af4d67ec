"""Datasets, synthetic generators, CSV round-tripping, and forget masks.

The CSV format is ``f0,...,f{D-1},label`` with an optional trailing
``group`` column; floats are serialized with full (round-trip)
precision so ``load(save(d)) == d`` exactly. Forget-mask files hold one
index per line, ascending, newline-terminated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadSpec, BudgetError, EmptyFile, FileError, ParseError, ShapeError
from .numcore import RngStream, as_matrix

__all__ = [
    "Split",
    "Dataset",
    "ForgetMask",
    "GroupLabels",
    "gen_blobs",
    "gen_biased",
    "save_csv",
    "load_csv",
    "load_csv_with_groups",
    "mask_from_weights",
    "subset",
]

# Lattice spacing between class means in gen_blobs. Clusters of spread
# sigma are >= 6 sigma apart whenever sigma <= 1/3; larger spreads
# overlap on purpose so misclassification-based metrics have signal.
BLOB_SPACING = 2.0


class Split(enum.Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass
class Dataset:
    """Feature matrix (N x D), integer labels in [0, classes), split tag."""

    X: np.ndarray
    y: np.ndarray
    split: Split = Split.TRAIN
    classes: int = 0

    def __post_init__(self):
        self.X = as_matrix(self.X)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.shape[0] == 0:
            raise BadSpec("dataset must hold at least one sample")
        if self.y.shape != (self.X.shape[0],):
            raise ShapeError(f"labels shape {self.y.shape} != ({self.X.shape[0]},)")
        if not np.all(np.isfinite(self.X)):
            raise ShapeError("features contain non-finite entries")
        if self.classes <= 0:
            self.classes = int(self.y.max()) + 1
        if self.y.min() < 0 or self.y.max() >= self.classes:
            raise ShapeError(f"labels must lie in [0, {self.classes})")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def equals(self, other: "Dataset") -> bool:
        return (
            self.split is other.split
            and self.classes == other.classes
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )


@dataclass
class GroupLabels:
    """Per-sample attribute values (e.g. a spurious binary attribute)."""

    group: np.ndarray

    def __post_init__(self):
        self.group = np.asarray(self.group, dtype=np.int64)


@dataclass
class ForgetMask:
    """Sorted unique training-set indices designated for forgetting."""

    indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1:
            raise ShapeError("mask indices must be 1-D")
        if idx.size and (np.any(np.diff(np.sort(idx)) == 0)):
            raise BadSpec("mask indices must be unique")
        if idx.size and idx.min() < 0:
            raise BadSpec("mask indices must be non-negative")
        self.indices = np.sort(idx)

    @property
    def m(self) -> int:
        return self.indices.size

    def complement(self, n: int) -> np.ndarray:
        """Retain-set indices, ascending."""
        if self.indices.size and self.indices.max() >= n:
            raise BadSpec(f"mask index {self.indices.max()} out of range for n={n}")
        keep = np.ones(n, dtype=bool)
        keep[self.indices] = False
        return np.nonzero(keep)[0]

    def save(self, path) -> None:
        with open(path, "w") as fh:
            for i in self.indices:
                fh.write(f"{int(i)}\n")

    @staticmethod
    def load(path) -> "ForgetMask":
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
        return ForgetMask(np.asarray([int(ln) for ln in lines], dtype=np.int64))


def subset(dataset: Dataset, indices) -> Dataset:
    idx = np.asarray(indices, dtype=np.int64)
    return Dataset(dataset.X[idx], dataset.y[idx], dataset.split, dataset.classes)


def _lattice_means(classes: int, dim: int) -> np.ndarray:
    """Class means on a centered integer lattice scaled by BLOB_SPACING."""
    side = int(np.ceil(classes ** (1.0 / dim)))
    means = np.zeros((classes, dim))
    for c in range(classes):
        rem = c
        for d in range(dim):
            means[c, d] = rem % side
            rem //= side
    means -= means.mean(axis=0)
    return means * BLOB_SPACING


def gen_blobs(
    n_per_class: int,
    classes: int,
    dim: int,
    spread: float,
    rng: RngStream,
    split: Split = Split.TRAIN,
) -> Dataset:
    """Gaussian clusters with deterministic means on a scaled grid."""
    if n_per_class <= 0 or classes <= 0 or dim <= 0:
        raise BadSpec("n_per_class, classes, and dim must be positive")
    if not spread > 0:
        raise BadSpec("spread must be positive")
    means = _lattice_means(classes, dim)
    gen = rng.generator()
    X = np.empty((n_per_class * classes, dim))
    y = np.empty(n_per_class * classes, dtype=np.int64)
    for c in range(classes):
        block = slice(c * n_per_class, (c + 1) * n_per_class)
        X[block] = means[c] + spread * gen.standard_normal((n_per_class, dim))
        y[block] = c
    return Dataset(X, y, split, classes)


def gen_biased(
    n: int,
    correlation: float,
    rng: RngStream,
    split: Split = Split.TRAIN,
) -> tuple[Dataset, GroupLabels]:
    """Binary task with a spurious binary attribute.

    Each sample's group equals its label with probability
    ``correlation`` (drawn independently). Feature 0 carries the true
    label signal; feature 1 carries a cleaner, stronger group signal, so
    group-aligned samples sit far from the decision boundary and
    conflicting samples are the hard ones.
    """
    if n <= 0:
        raise BadSpec("n must be positive")
    if not 0.0 <= correlation <= 1.0:
        raise BadSpec("correlation must lie in [0, 1]")
    gen = rng.generator()
    y = (gen.random(n) < 0.5).astype(np.int64)
    aligned = gen.random(n) < correlation
    g = np.where(aligned, y, 1 - y)
    X = np.empty((n, 2))
    X[:, 0] = 1.0 * (2 * y - 1) + 1.0 * gen.standard_normal(n)
    X[:, 1] = 1.5 * (2 * g - 1) + 0.5 * gen.standard_normal(n)
    return Dataset(X, y, split, classes=2), GroupLabels(g)


def save_csv(dataset: Dataset, path, groups: GroupLabels | None = None) -> None:
    cols = [f"f{j}" for j in range(dataset.dim)] + ["label"]
    if groups is not None:
        cols.append("group")
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(dataset.n):
            cells = [repr(float(v)) for v in dataset.X[i]]
            cells.append(str(int(dataset.y[i])))
            if groups is not None:
                cells.append(str(int(groups.group[i])))
            fh.write(",".join(cells) + "\n")


def load_csv_with_groups(path, split: Split = Split.TRAIN) -> tuple[Dataset, GroupLabels | None]:
    path = Path(path)
    if not path.exists():
        raise FileError(f"dataset file not found: {path}")
    lines = path.read_text().splitlines()
    if not lines:
        raise EmptyFile(f"{path} is empty")
    header = lines[0].split(",")
    has_group = header and header[-1] == "group"
    feat_cols = header[:-2] if has_group else header[:-1]
    label_col = len(feat_cols)
    expected = [f"f{j}" for j in range(len(feat_cols))] + ["label"] + (["group"] if has_group else [])
    if header != expected:
        raise ParseError(f"{path}: header must be f0,...,f{{D-1}},label[,group], got {header}")
    rows = []
    labels = []
    groups = []
    for r, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(f"{path}: row {r} has {len(cells)} cells, expected {len(header)}")
        feats = np.empty(len(feat_cols))
        for j, cell in enumerate(cells[: len(feat_cols)]):
            try:
                feats[j] = float(cell)
            except ValueError:
                raise ParseError(f"{path}: row {r}, column f{j}: cannot parse {cell!r}") from None
        try:
            labels.append(int(cells[label_col]))
        except ValueError:
            raise ParseError(f"{path}: row {r}, column label: cannot parse {cells[label_col]!r}") from None
        if has_group:
            try:
                groups.append(int(cells[-1]))
            except ValueError:
                raise ParseError(f"{path}: row {r}, column group: cannot parse {cells[-1]!r}") from None
        rows.append(feats)
    if not rows:
        raise EmptyFile(f"{path} has a header but no data rows")
    dataset = Dataset(np.vstack(rows), np.asarray(labels, dtype=np.int64), split)
    return dataset, (GroupLabels(np.asarray(groups, dtype=np.int64)) if has_group else None)


def load_csv(path, split: Split = Split.TRAIN) -> Dataset:
    dataset, _ = load_csv_with_groups(path, split)
    return dataset


def mask_from_weights(w, m: int) -> ForgetMask:
    """Indices of the m largest weights; ties broken by lowest index."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1:
        raise ShapeError("weights must be 1-D")
    if m > w.size:
        raise BudgetError(f"m={m} exceeds {w.size} candidates")
    if m < 0:
        raise BudgetError("m must be non-negative")
    order = np.argsort(-w, kind="stable")
    return ForgetMask(order[:m])
