"""Model-ready matrices: class filtering, encoding, grouped split, folds, scaling, SMOTE."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from aistrip.features import CATEGORICAL_FEATURES, MODEL_FEATURES
from aistrip.seeding import derive_rng

log = logging.getLogger(__name__)

CLASSES = ("Cargo", "Fishing", "HSC", "Passenger", "Tanker")


class DatasetError(Exception):
    """Fatal data condition (empty set, unsplittable groups, tiny classes)."""


class LabelCodec:
    """Bijection between category names and integer codes (sorted order)."""

    def __init__(self, classes: Iterable[str]):
        self.classes: tuple[str, ...] = tuple(sorted(set(classes)))
        self._index = {c: i for i, c in enumerate(self.classes)}

    def __len__(self) -> int:
        return len(self.classes)

    def encode(self, values: Iterable[str], unknown: Optional[int] = None) -> np.ndarray:
        out = []
        for v in values:
            if v in self._index:
                out.append(self._index[v])
            elif unknown is not None:
                out.append(unknown)
            else:
                raise KeyError(f"unknown category {v!r}")
        return np.array(out, dtype=np.int64)

    def decode(self, codes: Iterable[int]) -> list[str]:
        return [self.classes[int(c)] for c in codes]

    def to_list(self) -> list[str]:
        return list(self.classes)


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray  # zero marks a constant feature

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        scale = np.maximum(1.0, np.abs(mean))
        std = np.where(std <= 1e-12 * scale, 0.0, std)
        return cls(mean, std)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        safe = np.where(self.std > 0, self.std, 1.0)
        Z = (X - self.mean) / safe
        Z[:, self.std == 0] = 0.0
        return Z

    def inverse_transform(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.std + self.mean

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.array(d["mean"], dtype=float), np.array(d["std"], dtype=float))


@dataclass
class PreparedRows:
    rows: list[dict]
    dropped_class: int = 0
    dropped_missing: int = 0


def prepare(rows: Sequence[dict], classes: Sequence[str] = CLASSES, require_label: bool = True) -> PreparedRows:
    """Keep the target classes and rows with every model feature present."""
    keep = set(classes)
    out = PreparedRows([])
    for r in rows:
        if require_label and r.get("ship_type") not in keep:
            out.dropped_class += 1
            continue
        if any(r.get(f) is None for f in MODEL_FEATURES):
            out.dropped_missing += 1
            continue
        out.rows.append(r)
    if not out.rows:
        raise DatasetError("no rows left after class filter and missing-value drop")
    return out


@dataclass
class Encoder:
    """Turns prepared rows into a numeric matrix in MODEL_FEATURES order."""

    categories: dict[str, LabelCodec]

    @classmethod
    def fit(cls, rows: Sequence[dict]) -> "Encoder":
        return cls({c: LabelCodec(r[c] for r in rows) for c in CATEGORICAL_FEATURES})

    def matrix(self, rows: Sequence[dict]) -> np.ndarray:
        X = np.empty((len(rows), len(MODEL_FEATURES)), dtype=float)
        for j, name in enumerate(MODEL_FEATURES):
            if name in self.categories:
                codec = self.categories[name]
                X[:, j] = codec.encode((r[name] for r in rows), unknown=len(codec))
            else:
                X[:, j] = [r[name] for r in rows]
        return X

    def to_dict(self) -> dict:
        return {k: v.to_list() for k, v in self.categories.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "Encoder":
        return cls({k: LabelCodec(v) for k, v in d.items()})


@dataclass
class SplitPlan:
    test_fraction: float
    seed: int
    train_idx: np.ndarray
    test_idx: np.ndarray
    train_mmsi: list[int]
    test_mmsi: list[int]

    def to_dict(self) -> dict:
        return {
            "test_fraction": self.test_fraction,
            "seed": self.seed,
            "train_idx": self.train_idx.tolist(),
            "test_idx": self.test_idx.tolist(),
            "train_mmsi": self.train_mmsi,
            "test_mmsi": self.test_mmsi,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SplitPlan":
        return cls(d["test_fraction"], d["seed"], np.array(d["train_idx"], dtype=np.int64),
                   np.array(d["test_idx"], dtype=np.int64), list(d["train_mmsi"]), list(d["test_mmsi"]))


def grouped_split(mmsi: Sequence[int], test_fraction: float = 0.2, seed: int = 42) -> SplitPlan:
    """Assign whole vessels to the test set until it holds ``test_fraction`` of the rows.

    MMSIs are shuffled (seeded) and taken greedily; the test set stops growing
    as soon as its row count first reaches the target.
    """
    groups = np.asarray(mmsi, dtype=np.int64)
    n = groups.size
    if n == 0:
        raise DatasetError("cannot split an empty table")
    counts = Counter(groups.tolist())
    biggest, size = max(counts.items(), key=lambda kv: kv[1])
    if size > (1 - test_fraction) * n:
        raise DatasetError(f"MMSI {biggest} owns {size}/{n} rows; no grouped split possible")
    order = sorted(counts)
    derive_rng(seed, "split").shuffle(order)
    target = test_fraction * n
    test_set, taken = set(), 0
    for m in order:
        if taken >= target:
            break
        test_set.add(m)
        taken += counts[m]
    is_test = np.fromiter((g in test_set for g in groups.tolist()), bool, n)
    return SplitPlan(
        test_fraction=test_fraction,
        seed=seed,
        train_idx=np.flatnonzero(~is_test),
        test_idx=np.flatnonzero(is_test),
        train_mmsi=sorted(set(counts) - test_set),
        test_mmsi=sorted(test_set),
    )


@dataclass
class FoldPlan:
    k: int
    seed: int
    folds: list[np.ndarray]  # validation indices per fold
    n: int = 0

    def train_idx(self, i: int) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.folds[i]] = False
        return np.flatnonzero(mask)

    def __iter__(self):
        for i in range(self.k):
            yield self.train_idx(i), self.folds[i]

    def to_dict(self) -> dict:
        return {"k": self.k, "seed": self.seed, "n": self.n, "folds": [f.tolist() for f in self.folds]}

    @classmethod
    def from_dict(cls, d: dict) -> "FoldPlan":
        return cls(d["k"], d["seed"], [np.array(f, dtype=np.int64) for f in d["folds"]], d["n"])


def stratified_kfold(labels: Sequence, k: int = 5, seed: int = 42) -> FoldPlan:
    """Shuffle each class (seeded) and deal its members round-robin to the folds.

    The dealing position carries over from one class to the next so fold
    sizes differ by at most one overall as well as per class.
    """
    y = np.asarray(labels)
    classes, counts = np.unique(y, return_counts=True)
    small = [(c, n) for c, n in zip(classes, counts) if n < k]
    if small:
        c, cnt = small[0]
        raise DatasetError(f"class {c!r} has {cnt} members, fewer than k={k}")
    rng = derive_rng(seed, "folds")
    buckets: list[list[int]] = [[] for _ in range(k)]
    pos = 0
    for c in classes:
        members = np.flatnonzero(y == c)
        rng.shuffle(members)
        for idx in members:
            buckets[pos % k].append(int(idx))
            pos += 1
    return FoldPlan(k, seed, [np.array(sorted(b), dtype=np.int64) for b in buckets], int(y.size))


def _nearest_same_class(Xc: np.ndarray, k: int) -> np.ndarray:
    """k nearest neighbours (excluding self) within one class; ties go to the lower index."""
    out = np.empty((len(Xc), k), dtype=np.int64)
    for i in range(len(Xc)):
        d2 = ((Xc - Xc[i]) ** 2).sum(axis=1)
        d2[i] = np.inf
        out[i] = np.argsort(d2, kind="stable")[:k]
    return out


@dataclass
class SmoteResult:
    X: np.ndarray
    y: np.ndarray
    synthetic: np.ndarray = field(repr=False)  # bool mask


def smote(X: np.ndarray, y: np.ndarray, k_neighbors: int = 5, seed: int = 42) -> SmoteResult:
    """Oversample every minority class to the majority count by interpolation.

    Originals come first, unchanged and in input order; synthetic rows follow,
    grouped by class code.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    target = counts.max()
    new_X, new_y = [], []
    for c, cnt in zip(classes, counts):
        need = int(target - cnt)
        if need == 0:
            continue
        if cnt < 2:
            raise DatasetError(f"class {c!r} has a single member; cannot interpolate")
        members = np.flatnonzero(y == c)
        Xc = X[members]
        nn = _nearest_same_class(Xc, min(k_neighbors, cnt - 1))
        rng = derive_rng(seed, "smote", int(c))
        base = rng.integers(0, cnt, size=need)
        pick = nn[base, rng.integers(0, nn.shape[1], size=need)]
        gap = rng.random(need)[:, None]
        new_X.append(Xc[base] + gap * (Xc[pick] - Xc[base]))
        new_y.append(np.full(need, c, dtype=y.dtype))
    if not new_X:
        return SmoteResult(X.copy(), y.copy(), np.zeros(len(y), dtype=bool))
    X_out = np.vstack([X] + new_X)
    y_out = np.concatenate([y] + new_y)
    synthetic = np.zeros(len(y_out), dtype=bool)
    synthetic[len(y):] = True
    return SmoteResult(X_out, y_out, synthetic)
