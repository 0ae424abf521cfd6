"""Dataset loading, deterministic train/validation splitting, synthetic generators.

CSV schema: UTF-8, comma separated, header `f1,...,fk,label`.  Labels may be any
tokens; they are mapped to dense integers in order of first appearance and the
mapping is kept on the Dataset.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

SYNTHETIC_KINDS = ("xor", "two_gaussians", "rings")


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    name: str = "dataset"
    label_names: Tuple[str, ...] = ()

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.features.shape[0]} feature rows vs {self.labels.shape[0]} labels"
            )
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain NaN or infinity")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError(f"labels must lie in [0, {self.num_classes})")
        if self.num_classes < 2:
            raise ValueError("need at least 2 classes")
        if not self.label_names:
            self.label_names = tuple(str(c) for c in range(self.num_classes))

    @property
    def num_examples(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices, name_suffix: str = "") -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.features[idx],
            self.labels[idx],
            self.num_classes,
            self.name + name_suffix,
            self.label_names,
        )


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.1
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(
                f"train_fraction must be in (0,1), got {self.train_fraction}"
            )


def load_csv(path, name: str | None = None) -> Dataset:
    """Parse the documented CSV schema; malformed rows are reported by line number."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if "label" not in header:
            raise ValueError(f"{path}: header has no `label` column")
        label_col = header.index("label")
        feature_cols = [i for i in range(len(header)) if i != label_col]

        rows: List[List[float]] = []
        raw_labels: List[str] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            values = []
            for i in feature_cols:
                try:
                    v = float(row[i])
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: non-numeric feature {row[i]!r} in column {header[i]}"
                    ) from None
                if not math.isfinite(v):
                    raise ValueError(
                        f"{path}:{lineno}: non-finite feature {row[i]!r} in column {header[i]}"
                    )
                values.append(v)
            rows.append(values)
            raw_labels.append(row[label_col].strip())

    if not rows:
        raise ValueError(f"{path}: no data rows")
    mapping: dict = {}
    labels = []
    for token in raw_labels:
        if token not in mapping:
            mapping[token] = len(mapping)
        labels.append(mapping[token])
    if len(mapping) < 2:
        raise ValueError(f"{path}: need at least 2 distinct labels")
    return Dataset(
        np.array(rows),
        np.array(labels),
        num_classes=len(mapping),
        name=name or str(path),
        label_names=tuple(mapping),
    )


def write_csv(ds: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        cols = [f"f{i + 1}" for i in range(ds.num_features)] + ["label"]
        fh.write(",".join(cols) + "\n")
        for row, label in zip(ds.features, ds.labels):
            fields = [repr(float(v)) for v in row] + [ds.label_names[label]]
            fh.write(",".join(fields) + "\n")


def _train_quota(counts: np.ndarray, train_size: int) -> np.ndarray:
    """Per-class train counts by largest remainder, each class taking >= 1."""
    num_classes = counts.shape[0]
    if train_size < num_classes:
        raise ValueError(
            f"train split of {train_size} cannot cover all {num_classes} classes"
        )
    exact = counts * (train_size / counts.sum())
    quota = np.maximum(np.floor(exact).astype(np.int64), 1)
    quota = np.minimum(quota, counts)
    # settle the residual one example at a time, largest remainder first
    while quota.sum() != train_size:
        if quota.sum() < train_size:
            room = quota < counts
            frac = np.where(room, exact - quota, -np.inf)
            quota[int(np.argmax(frac))] += 1
        else:
            shrinkable = quota > 1
            frac = np.where(shrinkable, exact - quota, np.inf)
            quota[int(np.argmin(frac))] -= 1
    return quota


def split(ds: Dataset, spec: SplitSpec) -> Tuple[Dataset, Dataset]:
    """Deterministic partition; both parts preserve original row order."""
    n = ds.num_examples
    train_size = int(round(spec.train_fraction * n))
    if train_size < 1 or train_size >= n:
        raise ValueError(
            f"train_fraction {spec.train_fraction} leaves an empty split for {n} rows"
        )
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        classes, counts = np.unique(ds.labels, return_counts=True)
        quota = _train_quota(counts, train_size)
        train_idx: List[int] = []
        for cls, take in zip(classes, quota):
            members = np.flatnonzero(ds.labels == cls)
            chosen = rng.choice(members, size=int(take), replace=False)
            train_idx.extend(int(i) for i in chosen)
    else:
        train_idx = [int(i) for i in rng.choice(n, size=train_size, replace=False)]
    mask = np.zeros(n, dtype=bool)
    mask[train_idx] = True
    train = ds.subset(np.flatnonzero(mask), "/train")
    validation = ds.subset(np.flatnonzero(~mask), "/validation")
    return train, validation


def make_synthetic(kind: str, n: int, noise: float = 0.2, seed: int = 0) -> Dataset:
    """Balanced 2-D two-class dataset; deterministic per seed."""
    if kind not in SYNTHETIC_KINDS:
        raise ValueError(f"kind must be one of {SYNTHETIC_KINDS}, got {kind!r}")
    if n < 8:
        raise ValueError(f"need n >= 8, got {n}")
    rng = np.random.default_rng(seed)
    features = np.empty((n, 2))
    labels = np.empty(n, dtype=np.int64)
    if kind == "xor":
        corners = np.array([(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)])
        for i in range(n):
            cx, cy = corners[i % 4]
            features[i] = (cx, cy)
            labels[i] = int(cx) ^ int(cy)
        features += rng.normal(0.0, noise, size=(n, 2))
    elif kind == "two_gaussians":
        centers = np.array([(-1.0, 0.0), (1.0, 0.0)])
        for i in range(n):
            labels[i] = i % 2
            features[i] = centers[i % 2]
        features += rng.normal(0.0, noise, size=(n, 2))
    else:  # rings
        radii = (1.0, 2.0)
        angles = rng.uniform(0.0, 2.0 * math.pi, size=n)
        for i in range(n):
            labels[i] = i % 2
            r = radii[i % 2]
            features[i] = (r * math.cos(angles[i]), r * math.sin(angles[i]))
        features += rng.normal(0.0, noise, size=(n, 2))
    name = f"{kind}(n={n},noise={noise},seed={seed})"
    return Dataset(features, labels, num_classes=2, name=name)
