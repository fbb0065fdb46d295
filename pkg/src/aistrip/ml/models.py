"""Model registry, the train-time pipeline, and the serialized TrainedModel."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from aistrip.dataset import Encoder, LabelCodec, Standardizer, smote
from aistrip.features import MODEL_FEATURES
from aistrip.ml.gnb import GaussianNB
from aistrip.ml.svm import SVM
from aistrip.ml.tree import DecisionTree, RandomForest

FAMILIES = ("gnb", "svm", "dt", "rf")
SMOTE_MODES = ("fold", "paper", "off")
FORMAT_VERSION = 1

DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "gnb": {},
    "svm": {"C": 1.0, "kernel": "rbf", "gamma": "scale"},
    "dt": {"max_depth": None, "min_samples_split": 2, "min_samples_leaf": 1},
    "rf": {"n_estimators": 100, "max_depth": None, "min_samples_split": 2, "min_samples_leaf": 1},
}


def make_model(family: str, n_classes: int, params: Optional[dict] = None, seed: int = 42):
    if family not in FAMILIES:
        raise ValueError(f"unknown model family {family!r}; choose from {FAMILIES}")
    kw = {**DEFAULT_PARAMS[family], **(params or {})}
    if family == "gnb":
        return GaussianNB(n_classes, **kw)
    if family == "svm":
        return SVM(n_classes, **kw)
    if family == "dt":
        return DecisionTree(n_classes, **kw)
    return RandomForest(n_classes, seed=seed, **kw)


def fit_pipeline(family: str, params: Optional[dict], X: np.ndarray, y: np.ndarray, n_classes: int,
                 smote_mode: str = "fold", smote_k: int = 5, seed: int = 42):
    """Standardize on X, oversample unless SMOTE is off, then fit. Returns (standardizer, model)."""
    if smote_mode not in SMOTE_MODES:
        raise ValueError(f"unknown SMOTE mode {smote_mode!r}")
    scaler = Standardizer.fit(X)
    Z = scaler.transform(X)
    if smote_mode != "off":
        res = smote(Z, y, k_neighbors=smote_k, seed=seed)
        Z, y = res.X, res.y
    return scaler, make_model(family, n_classes, params, seed).fit(Z, y)


@dataclass
class TrainedModel:
    family: str
    params: dict
    model: Any
    labels: LabelCodec
    encoder: Encoder
    standardizer: Standardizer
    seed: int
    smote_mode: str
    features: tuple[str, ...] = MODEL_FEATURES
    tuning: str = "default"  # default | tuned | custom

    def scores(self, X: np.ndarray) -> np.ndarray:
        return self.model.scores(self.standardizer.transform(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.model.predict(self.standardizer.transform(X))

    def matrix(self, rows: Sequence[dict]) -> np.ndarray:
        return self.encoder.matrix(rows)

    def predict_rows(self, rows: Sequence[dict]) -> list[str]:
        if not rows:
            return []
        return self.labels.decode(self.predict(self.matrix(rows)))

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "family": self.family,
            "params": self.params,
            "seed": self.seed,
            "smote_mode": self.smote_mode,
            "tuning": self.tuning,
            "features": list(self.features),
            "classes": self.labels.to_list(),
            "encoder": self.encoder.to_dict(),
            "standardizer": self.standardizer.to_dict(),
            "fitted": self.model.fitted(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format {d.get('format_version')!r}")
        if tuple(d["features"]) != MODEL_FEATURES:
            raise ValueError("model was trained on a different feature schema")
        labels = LabelCodec(d["classes"])
        model = make_model(d["family"], len(labels), d["params"], d["seed"])
        model.load_fitted(d["fitted"])
        return cls(d["family"], d["params"], model, labels, Encoder.from_dict(d["encoder"]),
                   Standardizer.from_dict(d["standardizer"]), d["seed"], d["smote_mode"], tuple(d["features"]),
                   d.get("tuning", "default"))


def train(family: str, rows: Sequence[dict], params: Optional[dict] = None, smote_mode: str = "fold",
          smote_k: int = 5, seed: int = 42, labels: Optional[LabelCodec] = None,
          tuning: str = "default") -> TrainedModel:
    """Fit a full TrainedModel on prepared feature rows."""
    labels = labels or LabelCodec(r["ship_type"] for r in rows)
    encoder = Encoder.fit(rows)
    X = encoder.matrix(rows)
    y = labels.encode(r["ship_type"] for r in rows)
    kw = {**DEFAULT_PARAMS[family], **(params or {})}
    scaler, model = fit_pipeline(family, kw, X, y, len(labels), smote_mode, smote_k, seed)
    return TrainedModel(family, kw, model, labels, encoder, scaler, seed, smote_mode, tuning=tuning)
