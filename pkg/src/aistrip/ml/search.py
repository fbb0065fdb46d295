"""Cross-validated grid search."""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from aistrip.dataset import FoldPlan, Standardizer, smote, stratified_kfold
from aistrip.ml.models import SMOTE_MODES, fit_pipeline, make_model

DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "gnb": {},
    "svm": {"C": [0.1, 1, 10, 100], "kernel": ["linear", "rbf"], "gamma": ["scale", "auto"]},
    "dt": {"max_depth": [None, 5, 10, 20], "min_samples_split": [2, 5, 10], "min_samples_leaf": [1, 2, 4]},
    "rf": {"n_estimators": [100, 200], "max_depth": [None, 5, 10, 20], "min_samples_split": [2, 5, 10]},
}


class GridError(ValueError):
    pass


def expand_grid(grid: dict[str, list]) -> list[dict[str, Any]]:
    """Cartesian product in key order, last key varying fastest."""
    if any(len(v) == 0 for v in grid.values()):
        raise GridError("grid has a parameter with no candidate values")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


@dataclass
class CvResult:
    family: str
    smote_mode: str
    combos: list[dict]
    fold_scores: np.ndarray  # (n_combos, k)

    @property
    def mean(self) -> np.ndarray:
        return self.fold_scores.mean(axis=1)

    @property
    def std(self) -> np.ndarray:
        return self.fold_scores.std(axis=1)

    @property
    def best_index(self) -> int:
        return int(np.argmax(self.mean))  # first occurrence wins ties

    @property
    def best_params(self) -> dict:
        return self.combos[self.best_index]

    def ranking(self) -> list[int]:
        return sorted(range(len(self.combos)), key=lambda i: (-self.mean[i], i))

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "smote_mode": self.smote_mode,
            "best_index": self.best_index,
            "best_params": self.best_params,
            "combos": [
                {"params": c, "mean": float(m), "std": float(s), "folds": f.tolist()}
                for c, m, s, f in zip(self.combos, self.mean, self.std, self.fold_scores)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CvResult":
        return cls(d["family"], d["smote_mode"], [c["params"] for c in d["combos"]],
                   np.array([c["folds"] for c in d["combos"]], dtype=float))


def cross_validate(family: str, params: Optional[dict], X, y, folds: FoldPlan, n_classes: int,
                   smote_mode: str = "fold", smote_k: int = 5, seed: int = 42) -> np.ndarray:
    """Per-fold validation accuracy.

    fold:  scaler and SMOTE are fit on each fold's training part only.
    off:   no oversampling.
    paper: the whole set is scaled and oversampled first, then re-folded, so
           synthetic points derived from validation rows can leak into training.
    """
    if smote_mode not in SMOTE_MODES:
        raise ValueError(f"unknown SMOTE mode {smote_mode!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if smote_mode == "paper":
        Z = Standardizer.fit(X).transform(X)
        res = smote(Z, y, k_neighbors=smote_k, seed=seed)
        X, y = res.X, res.y
        folds = stratified_kfold(y, folds.k, folds.seed)
        scores = []
        for tr, va in folds:
            model = make_model(family, n_classes, params, seed).fit(X[tr], y[tr])
            scores.append(float(np.mean(model.predict(X[va]) == y[va])))
        return np.array(scores)
    scores = []
    for tr, va in folds:
        scaler, model = fit_pipeline(family, params, X[tr], y[tr], n_classes, smote_mode, smote_k, seed)
        scores.append(float(np.mean(model.predict(scaler.transform(X[va])) == y[va])))
    return np.array(scores)


def grid_search(family: str, grid: Optional[dict], folds: FoldPlan, X, y, n_classes: int,
                smote_mode: str = "fold", smote_k: int = 5, seed: int = 42, threads: int = 1) -> CvResult:
    combos = expand_grid(DEFAULT_GRIDS[family] if grid is None else grid)

    def run(params):
        return cross_validate(family, params, X, y, folds, n_classes, smote_mode, smote_k, seed)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, combos))
    else:
        results = [run(c) for c in combos]
    return CvResult(family, smote_mode, combos, np.vstack(results))
