"""Labeled feature matrices: validation, file formats, concatenation,
stratified splitting, and synthetic blob generation.

Two on-disk formats are supported. The text format is a plain CSV of float
features followed by one integer label per row, with an optional canonical
header (f0,f1,...,label). The binary format is a little-endian dump with a
4-byte magic, three u32 header fields, float64 features in row-major order,
and u32 labels.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

MAGIC = b"FMX1"


@dataclass
class LabeledFeatureSet:
    """Dense float64 feature matrix paired with integer class labels.

    Invariants enforced at construction: the matrix is 2-D and non-empty,
    all values are finite, every label lies in [0, n_classes), and every
    class occurs at least once. Instances are treated as read-only.
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    feature_names: list[str] | None = None

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        n, d = self.features.shape
        if n < 1 or d < 1:
            raise DataError("empty matrix")
        if self.labels.shape != (n,):
            raise DataError(f"got {self.labels.size} labels for {n} rows")
        bad = ~np.isfinite(self.features)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise DataError(f"non-finite value at row {r}, col {c}")
        if self.n_classes < 1:
            raise DataError("n_classes must be positive")
        if self.labels.min() < 0 or self.labels.max() >= self.n_classes:
            r = int(np.argmax((self.labels < 0) | (self.labels >= self.n_classes)))
            raise DataError(f"label out of range at row {r}: {self.labels[r]}")
        counts = np.bincount(self.labels, minlength=self.n_classes)
        if (counts == 0).any():
            missing = int(np.argmin(counts))
            raise DataError(f"class {missing} has no samples")
        if self.feature_names is not None and len(self.feature_names) != d:
            raise DataError(f"got {len(self.feature_names)} feature names for {d} columns")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_dims(self) -> int:
        return self.features.shape[1]

    def take(self, indices) -> "LabeledFeatureSet":
        """Row subset, preserving n_classes and names."""
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledFeatureSet(self.features[idx], self.labels[idx],
                                 self.n_classes, self.feature_names)

    def select_columns(self, columns) -> "LabeledFeatureSet":
        """Column subset, preserving labels."""
        cols = np.asarray(columns, dtype=np.int64)
        names = None
        if self.feature_names is not None:
            names = [self.feature_names[c] for c in cols]
        return LabeledFeatureSet(self.features[:, cols], self.labels,
                                 self.n_classes, names)


@dataclass(frozen=True)
class SplitSpec:
    """Three-way split fractions plus shuffling seed."""

    train_fraction: float = 0.7
    val_fraction: float = 0.15
    test_fraction: float = 0.15
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        fr = (self.train_fraction, self.val_fraction, self.test_fraction)
        if any(not (0.0 < f < 1.0) for f in fr):
            raise ValueError(f"split fractions must lie in (0, 1), got {fr}")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fr)!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def fractions(self) -> tuple[float, float, float]:
        return (self.train_fraction, self.val_fraction, self.test_fraction)


def _float_repr(v: float) -> str:
    # shortest decimal string that parses back to the same float64
    return repr(float(v))


def _load_csv(path: str) -> LabeledFeatureSet:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    lines = raw.splitlines()
    while lines and lines[-1].strip() == "":
        lines.pop()
    if not lines:
        raise DataError(f"{path}: empty matrix")
    if lines[0].startswith("f0,"):
        lines = lines[1:]
        if not lines:
            raise DataError(f"{path}: empty matrix")
    n_cols = lines[0].count(",") + 1
    if n_cols < 2:
        raise DataError(f"{path}: row 0 has {n_cols} columns, need at least 2")
    rows = np.empty((len(lines), n_cols - 1), dtype=np.float64)
    labels = np.empty(len(lines), dtype=np.int64)
    for r, line in enumerate(lines):
        cells = line.split(",")
        if len(cells) != n_cols:
            raise DataError(f"{path}: row {r} has {len(cells)} columns, expected {n_cols}")
        for c, cell in enumerate(cells[:-1]):
            try:
                rows[r, c] = float(cell)
            except ValueError:
                raise DataError(f"{path}: malformed value at row {r}, col {c}: {cell!r}") from None
        try:
            labels[r] = int(cells[-1])
        except ValueError:
            raise DataError(f"{path}: malformed label at row {r}: {cells[-1]!r}") from None
    if labels.min() < 0:
        r = int(np.argmax(labels < 0))
        raise DataError(f"{path}: label out of range at row {r}: {labels[r]}")
    try:
        return LabeledFeatureSet(rows, labels, int(labels.max()) + 1)
    except DataError as e:
        raise DataError(f"{path}: {e}") from None


def _load_binary(path: str) -> LabeledFeatureSet:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    if len(blob) < 16:
        raise DataError(f"{path}: truncated header")
    if blob[:4] != MAGIC:
        raise DataError(f"{path}: bad magic {blob[:4]!r}")
    n, d, k = struct.unpack_from("<III", blob, 4)
    expected = 16 + 8 * n * d + 4 * n
    if len(blob) < expected:
        raise DataError(f"{path}: truncated file ({len(blob)} bytes, expected {expected})")
    if len(blob) > expected:
        raise DataError(f"{path}: {len(blob) - expected} trailing bytes")
    feats = np.frombuffer(blob, dtype="<f8", count=n * d, offset=16)
    labels = np.frombuffer(blob, dtype="<u4", count=n, offset=16 + 8 * n * d)
    try:
        return LabeledFeatureSet(feats.reshape(n, d).copy(),
                                 labels.astype(np.int64), int(k))
    except DataError as e:
        raise DataError(f"{path}: {e}") from None


def load_feature_set(path: str, format: str = "csv") -> LabeledFeatureSet:
    """Read a labeled set from disk. format is "csv" or "binary"."""
    if format == "csv":
        return _load_csv(path)
    if format == "binary":
        return _load_binary(path)
    raise ValueError(f"unknown format {format!r}")


def save_feature_set(dataset: LabeledFeatureSet, path: str, format: str = "csv") -> None:
    """Write a labeled set to disk so that a reload is bit-identical."""
    if format == "csv":
        with open(path, "w", encoding="utf-8") as fh:
            header = [f"f{i}" for i in range(dataset.n_dims)] + ["label"]
            fh.write(",".join(header) + "\n")
            for row, lab in zip(dataset.features, dataset.labels):
                fh.write(",".join(_float_repr(v) for v in row) + f",{lab}\n")
    elif format == "binary":
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<III", dataset.n_samples, dataset.n_dims,
                                 dataset.n_classes))
            fh.write(np.ascontiguousarray(dataset.features, dtype="<f8").tobytes())
            fh.write(dataset.labels.astype("<u4").tobytes())
    else:
        raise ValueError(f"unknown format {format!r}")


def concat_features(sets: list[LabeledFeatureSet]) -> LabeledFeatureSet:
    """Column-wise concatenation of feature blocks that share rows and labels."""
    if not sets:
        raise ValueError("need at least one set to concatenate")
    first = sets[0]
    for s in sets[1:]:
        if s.n_samples != first.n_samples:
            raise DataError(f"row count mismatch: {first.n_samples} vs {s.n_samples}")
        if s.n_classes != first.n_classes:
            raise DataError(f"n_classes mismatch: {first.n_classes} vs {s.n_classes}")
        diff = np.flatnonzero(s.labels != first.labels)
        if diff.size:
            i = int(diff[0])
            raise DataError(f"label mismatch at row {i}: {first.labels[i]} vs {s.labels[i]}")
    names = None
    if all(s.feature_names is not None for s in sets):
        names = [n for s in sets for n in s.feature_names]
    return LabeledFeatureSet(np.hstack([s.features for s in sets]),
                             first.labels.copy(), first.n_classes, names)


def merge_rows(sets: list[LabeledFeatureSet]) -> LabeledFeatureSet:
    """Row-wise stacking of sets with identical columns and class space."""
    if not sets:
        raise ValueError("need at least one set to merge")
    first = sets[0]
    for s in sets[1:]:
        if s.n_dims != first.n_dims:
            raise DataError(f"column count mismatch: {first.n_dims} vs {s.n_dims}")
        if s.n_classes != first.n_classes:
            raise DataError(f"n_classes mismatch: {first.n_classes} vs {s.n_classes}")
    return LabeledFeatureSet(np.vstack([s.features for s in sets]),
                             np.concatenate([s.labels for s in sets]),
                             first.n_classes, first.feature_names)


def _largest_remainder(n: int, fractions: tuple[float, float, float]) -> list[int]:
    # floor the exact allocations, then hand the leftover units to the
    # largest fractional remainders; remainder ties go to the earlier split
    exact = [n * f for f in fractions]
    base = [int(np.floor(e)) for e in exact]
    leftover = n - sum(base)
    order = sorted(range(3), key=lambda i: (-(exact[i] - base[i]), i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def split(dataset: LabeledFeatureSet, spec: SplitSpec
          ) -> tuple[LabeledFeatureSet, LabeledFeatureSet, LabeledFeatureSet]:
    """Partition into train/val/test subsets.

    Stratified mode shuffles and allocates per class with largest-remainder
    rounding, so each per-class count is within one sample of the exact
    fractional share. A class whose allocation would leave any split empty
    raises DataError.
    """
    rng = np.random.default_rng(spec.seed)
    parts: list[list[np.ndarray]] = [[], [], []]
    if spec.stratified:
        for c in range(dataset.n_classes):
            idx = np.flatnonzero(dataset.labels == c)
            if idx.size < 3:
                raise DataError(f"class {c} has {idx.size} samples, too small to stratify")
            counts = _largest_remainder(idx.size, spec.fractions)
            if min(counts) == 0:
                raise DataError(f"class {c} too small to stratify: a split would be empty")
            perm = rng.permutation(idx)
            stops = np.cumsum(counts)
            parts[0].append(perm[:stops[0]])
            parts[1].append(perm[stops[0]:stops[1]])
            parts[2].append(perm[stops[1]:])
    else:
        counts = _largest_remainder(dataset.n_samples, spec.fractions)
        if min(counts) == 0:
            raise DataError("dataset too small: a split would be empty")
        perm = rng.permutation(dataset.n_samples)
        stops = np.cumsum(counts)
        parts[0].append(perm[:stops[0]])
        parts[1].append(perm[stops[0]:stops[1]])
        parts[2].append(perm[stops[1]:])
    subsets = []
    for chunks in parts:
        idx = np.sort(np.concatenate(chunks))
        subsets.append(dataset.take(idx))
    return subsets[0], subsets[1], subsets[2]


def synth_dataset(n_samples: int, n_informative: int, n_noise: int,
                  n_classes: int, class_sep: float, seed: int) -> LabeledFeatureSet:
    """Gaussian blob data with informative dimensions first.

    Class c is centered at c * class_sep in every informative dimension;
    noise dimensions are standard normal and carry no class signal.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if n_informative < 1:
        raise ValueError("n_informative must be positive")
    if n_noise < 0:
        raise ValueError("n_noise must be non-negative")
    if n_classes < 1:
        raise ValueError("n_classes must be positive")
    if n_samples < n_classes:
        raise ValueError(f"need at least one sample per class ({n_samples} < {n_classes})")
    if not (class_sep > 0.0):
        raise ValueError("class_sep must be positive")
    rng = np.random.default_rng(seed)
    labels = np.arange(n_samples, dtype=np.int64) % n_classes
    features = rng.standard_normal((n_samples, n_informative + n_noise))
    features[:, :n_informative] += (labels * class_sep)[:, None]
    return LabeledFeatureSet(features, labels, n_classes)
