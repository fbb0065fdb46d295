"""Feature importance: forest Gini importance and permutation importance."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from aistrip.ml.tree import gini_importance
from aistrip.seeding import derive_rng

__all__ = ["gini_importance", "permutation_importance", "PermutationResult", "write_importance_csv"]


@dataclass
class PermutationResult:
    baseline: float
    mean: np.ndarray
    std: np.ndarray
    drops: np.ndarray  # (n_features, n_repeats)


def permutation_importance(predict: Callable[[np.ndarray], np.ndarray], X, y, seed: int = 42,
                           n_repeats: int = 10) -> PermutationResult:
    """Accuracy drop after shuffling one column at a time.

    Each (feature, repeat) shuffle draws from its own derived stream.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    baseline = float(np.mean(predict(X) == y))
    drops = np.zeros((X.shape[1], n_repeats))
    for j in range(X.shape[1]):
        Xp = X.copy()
        for r in range(n_repeats):
            Xp[:, j] = X[derive_rng(seed, "permutation", j, r).permutation(len(X)), j]
            drops[j, r] = baseline - float(np.mean(predict(Xp) == y))
    return PermutationResult(baseline, drops.mean(axis=1), drops.std(axis=1), drops)


def write_importance_csv(fh, names: Sequence[str], mean, std=None) -> None:
    """CSV rows of (feature, importance[, std]) sorted by decreasing importance."""
    order = sorted(range(len(names)), key=lambda j: (-mean[j], j))
    fh.write("feature,importance" + (",std" if std is not None else "") + "\n")
    for j in order:
        line = f"{names[j]},{mean[j]:.6f}"
        if std is not None:
            line += f",{std[j]:.6f}"
        fh.write(line + "\n")
