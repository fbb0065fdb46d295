"""Gaussian naive Bayes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

VAR_SMOOTHING = 1e-9


@dataclass
class GaussianNB:
    n_classes: int
    priors: Optional[np.ndarray] = None
    means: Optional[np.ndarray] = None      # (K, d)
    variances: Optional[np.ndarray] = None  # (K, d), floor already added
    epsilon: float = 0.0

    family = "gnb"

    def fit(self, X, y) -> "GaussianNB":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        counts = np.bincount(y, minlength=self.n_classes)
        if (counts == 0).any():
            missing = np.flatnonzero(counts == 0).tolist()
            raise ValueError(f"classes {missing} have no training samples")
        self.epsilon = VAR_SMOOTHING * float(X.var(axis=0).max())
        if self.epsilon <= 0:
            self.epsilon = VAR_SMOOTHING
        d = X.shape[1]
        self.means = np.empty((self.n_classes, d))
        self.variances = np.empty((self.n_classes, d))
        for k in range(self.n_classes):
            Xk = X[y == k]
            self.means[k] = Xk.mean(axis=0)
            self.variances[k] = Xk.var(axis=0) + self.epsilon
        self.priors = counts / counts.sum()
        return self

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.empty((X.shape[0], self.n_classes))
        for k in range(self.n_classes):
            var = self.variances[k]
            ll = -0.5 * np.sum(np.log(2 * np.pi * var)) - 0.5 * np.sum((X - self.means[k]) ** 2 / var, axis=1)
            out[:, k] = np.log(self.priors[k]) + ll
        return out

    def scores(self, X) -> np.ndarray:
        """Normalized class log-posteriors."""
        jll = self.joint_log_likelihood(X)
        top = jll.max(axis=1, keepdims=True)
        return jll - (top + np.log(np.exp(jll - top).sum(axis=1, keepdims=True)))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.joint_log_likelihood(X), axis=1)

    def params(self) -> dict:
        return {}

    def fitted(self) -> dict:
        return {"priors": self.priors.tolist(), "means": self.means.tolist(),
                "variances": self.variances.tolist(), "epsilon": self.epsilon}

    def load_fitted(self, d: dict) -> None:
        self.priors = np.array(d["priors"], dtype=float)
        self.means = np.array(d["means"], dtype=float)
        self.variances = np.array(d["variances"], dtype=float)
        self.epsilon = float(d["epsilon"])
