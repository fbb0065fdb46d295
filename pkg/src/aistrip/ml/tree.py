"""CART classification trees (Gini) and bagged random forests.

Trees are stored as flat node arrays; the builder and the traversal are
compiled with numba because grid search fits thousands of trees.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from aistrip.seeding import derive_rng

_IMPROVE_EPS = 1e-12


@njit(cache=True, nogil=True)
def _build(X, y, samples, n_classes, max_depth, min_split, min_leaf, max_features, keys):
    n = samples.shape[0]
    d = X.shape[1]
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros((cap, n_classes))
    impurity = np.zeros(cap)
    n_node = np.zeros(cap, np.int64)

    idx = samples.copy()
    # stack entries: node id, start, end, depth
    stack = np.empty((cap, 4), np.int64)
    top = 0
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    top = 1
    n_nodes = 1

    counts_l = np.zeros(n_classes)
    counts_r = np.zeros(n_classes)
    vals = np.empty(n)
    feats = np.arange(d)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        m = end - start
        n_node[node] = m
        for c in range(n_classes):
            value[node, c] = 0.0
        for k in range(start, end):
            value[node, y[idx[k]]] += 1.0
        sq = 0.0
        for c in range(n_classes):
            sq += value[node, c] * value[node, c]
        imp = 1.0 - sq / (m * m)
        impurity[node] = imp

        if imp <= 0.0 or m < min_split or m < 2 * min_leaf or (max_depth >= 0 and depth >= max_depth):
            continue

        if max_features < d:
            order = np.argsort(keys[node])
            cand = np.sort(order[:max_features])
        else:
            cand = feats

        best_score = imp - _IMPROVE_EPS
        best_f = -1
        best_t = 0.0
        for fi in range(cand.shape[0]):
            f = cand[fi]
            for k in range(m):
                vals[k] = X[idx[start + k], f]
            order = np.argsort(vals[:m], kind="mergesort")
            for c in range(n_classes):
                counts_l[c] = 0.0
                counts_r[c] = value[node, c]
            sq_l = 0.0
            sq_r = sq
            for i in range(1, m):
                c = y[idx[start + order[i - 1]]]
                sq_l += 2.0 * counts_l[c] + 1.0
                counts_l[c] += 1.0
                sq_r -= 2.0 * counts_r[c] - 1.0
                counts_r[c] -= 1.0
                lo = vals[order[i - 1]]
                hi = vals[order[i]]
                if hi <= lo:
                    continue
                if i < min_leaf or m - i < min_leaf:
                    continue
                nl = float(i)
                nr = float(m - i)
                score = ((nl - sq_l / nl) + (nr - sq_r / nr)) / m
                if score < best_score - _IMPROVE_EPS or (best_f < 0 and score < best_score):
                    best_score = score
                    best_f = f
                    t = (lo + hi) / 2.0
                    if t >= hi:
                        t = lo
                    best_t = t

        if best_f < 0:
            continue

        # partition idx[start:end] in place around the threshold
        i = start
        j = end - 1
        while i <= j:
            if X[idx[i], best_f] <= best_t:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        feature[node] = best_f
        threshold[node] = best_t
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        # push right first so the left subtree is numbered first
        stack[top, 0] = rnode
        stack[top, 1] = i
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = lnode
        stack[top, 1] = start
        stack[top, 2] = i
        stack[top, 3] = depth + 1
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy(), impurity[:n_nodes].copy(),
            n_node[:n_nodes].copy())


@njit(cache=True, nogil=True)
def _apply(X, feature, threshold, left, right):
    out = np.empty(X.shape[0], np.int64)
    for s in range(X.shape[0]):
        node = 0
        while left[node] >= 0:
            if X[s, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[s] = node
    return out


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray       # class counts per node
    impurity: np.ndarray
    n_node_samples: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.left[node] >= 0:
                depth[self.left[node]] = depth[node] + 1
                depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def leaves(self, X: np.ndarray) -> np.ndarray:
        return _apply(np.ascontiguousarray(X, dtype=np.float64), self.feature, self.threshold, self.left, self.right)

    def proba(self, X: np.ndarray) -> np.ndarray:
        v = self.value[self.leaves(X)]
        return v / v.sum(axis=1, keepdims=True)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.value[self.leaves(X)], axis=1)

    def impurity_decrease(self) -> np.ndarray:
        """Per-feature sum of count-weighted Gini decrease over this tree's splits."""
        n_features = int(self.feature.max()) + 1 if (self.feature >= 0).any() else 0
        out = np.zeros(max(n_features, 1))
        w = self.n_node_samples * self.impurity
        for node in np.flatnonzero(self.left >= 0):
            out[self.feature[node]] += w[node] - w[self.left[node]] - w[self.right[node]]
        return out / self.n_node_samples[0]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "impurity": self.impurity.tolist(),
            "n_node_samples": self.n_node_samples.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            np.array(d["feature"], dtype=np.int64),
            np.array(d["threshold"], dtype=np.float64),
            np.array(d["left"], dtype=np.int64),
            np.array(d["right"], dtype=np.int64),
            np.array(d["value"], dtype=np.float64).reshape(len(d["feature"]), -1),
            np.array(d["impurity"], dtype=np.float64),
            np.array(d["n_node_samples"], dtype=np.int64),
        )


def build_tree(X, y, n_classes: int, samples=None, max_depth: Optional[int] = None,
               min_samples_split: int = 2, min_samples_leaf: int = 1,
               max_features: Optional[int] = None, rng: Optional[np.random.Generator] = None) -> Tree:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    n, d = X.shape
    if n == 0:
        raise ValueError("cannot fit a tree on an empty set")
    samples = np.arange(n, dtype=np.int64) if samples is None else np.ascontiguousarray(samples, dtype=np.int64)
    m = d if max_features is None else int(max_features)
    if m < d:
        if rng is None:
            raise ValueError("feature subsampling needs an rng")
        keys = rng.random((2 * len(samples) + 1, d))
    else:
        keys = np.zeros((1, d))
    parts = _build(X, y, samples, int(n_classes), -1 if max_depth is None else int(max_depth),
                   int(min_samples_split), int(min_samples_leaf), m, keys)
    return Tree(*parts)


@dataclass
class DecisionTree:
    """Single CART tree; class scores are leaf class frequencies."""

    n_classes: int
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    tree: Optional[Tree] = field(default=None, repr=False)

    family = "dt"

    def fit(self, X, y) -> "DecisionTree":
        self.tree = build_tree(X, y, self.n_classes, max_depth=self.max_depth,
                               min_samples_split=self.min_samples_split,
                               min_samples_leaf=self.min_samples_leaf)
        return self

    def scores(self, X) -> np.ndarray:
        return self.tree.proba(X)

    def predict(self, X) -> np.ndarray:
        return self.tree.predict(X)

    def params(self) -> dict:
        return {"max_depth": self.max_depth, "min_samples_split": self.min_samples_split,
                "min_samples_leaf": self.min_samples_leaf}

    def fitted(self) -> dict:
        return {"tree": self.tree.to_dict()}

    def load_fitted(self, d: dict) -> None:
        self.tree = Tree.from_dict(d["tree"])


@dataclass
class RandomForest:
    """Bagged CART trees with per-split feature subsampling and majority voting."""

    n_classes: int
    n_estimators: int = 100
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: Optional[int] = -1  # -1: floor(sqrt(d)); None: all features
    bootstrap: bool = True
    seed: int = 42
    trees: list[Tree] = field(default_factory=list, repr=False)

    family = "rf"

    def fit(self, X, y) -> "RandomForest":
        X = np.ascontiguousarray(X, dtype=np.float64)
        n, d = X.shape
        m = int(np.floor(np.sqrt(d))) if self.max_features == -1 else self.max_features
        self.trees = []
        for t in range(self.n_estimators):
            samples = derive_rng(self.seed, "bootstrap", t).integers(0, n, n) if self.bootstrap else None
            self.trees.append(build_tree(
                X, y, self.n_classes, samples=samples, max_depth=self.max_depth,
                min_samples_split=self.min_samples_split, min_samples_leaf=self.min_samples_leaf,
                max_features=m, rng=derive_rng(self.seed, "features", t),
            ))
        return self

    def votes(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        counts = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            counts[rows, tree.predict(X)] += 1
        return counts

    def scores(self, X) -> np.ndarray:
        return self.votes(X) / len(self.trees)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.votes(X), axis=1)

    def gini_importance(self, n_features: int) -> np.ndarray:
        total = np.zeros(n_features)
        for tree in self.trees:
            dec = tree.impurity_decrease()
            total[: len(dec)] += dec
        s = total.sum()
        return total / s if s > 0 else total

    def params(self) -> dict:
        return {"n_estimators": self.n_estimators, "max_depth": self.max_depth,
                "min_samples_split": self.min_samples_split, "min_samples_leaf": self.min_samples_leaf,
                "max_features": self.max_features, "bootstrap": self.bootstrap}

    def fitted(self) -> dict:
        return {"trees": [t.to_dict() for t in self.trees]}

    def load_fitted(self, d: dict) -> None:
        self.trees = [Tree.from_dict(t) for t in d["trees"]]


def gini_importance(model, n_features: int) -> np.ndarray:
    """Normalized Gini importance for a forest or a single tree."""
    if isinstance(model, RandomForest):
        return model.gini_importance(n_features)
    dec = np.zeros(n_features)
    part = model.tree.impurity_decrease()
    dec[: len(part)] = part
    s = dec.sum()
    return dec / s if s > 0 else dec
