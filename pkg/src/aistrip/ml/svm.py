"""One-vs-rest soft-margin SVM trained with sequential minimal optimization.

The binary solver follows the second-order working-set selection used by
libsvm: pick the maximal violator i, then the j that maximizes the
guaranteed decrease of the dual objective.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numba import njit

log = logging.getLogger(__name__)

KKT_TOL = 1e-3
MAX_PASSES = 10_000
_TAU = 1e-12


class SvmConvergenceWarning(UserWarning):
    pass


@njit(cache=True, nogil=True)
def _smo(K, y, C, tol, max_iter):
    n = y.shape[0]
    a = np.zeros(n)
    G = -np.ones(n)
    it = 0
    gap = np.inf
    while True:
        gmax = -np.inf
        i = -1
        for t in range(n):
            if (y[t] > 0 and a[t] < C) or (y[t] < 0 and a[t] > 0):
                v = -y[t] * G[t]
                if v > gmax:
                    gmax = v
                    i = t
        gmax2 = -np.inf
        j = -1
        best = np.inf
        for t in range(n):
            if (y[t] > 0 and a[t] > 0) or (y[t] < 0 and a[t] < C):
                v = y[t] * G[t]
                if v > gmax2:
                    gmax2 = v
                if i >= 0:
                    b = gmax + v
                    if b > 0:
                        q = K[i, i] + K[t, t] - 2.0 * K[i, t]
                        if q <= 0:
                            q = _TAU
                        obj = -(b * b) / q
                        if obj < best:
                            best = obj
                            j = t
        gap = gmax + gmax2
        if gap < tol or j < 0 or it >= max_iter:
            break
        it += 1

        ai, aj = a[i], a[j]
        q = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if q <= 0:
            q = _TAU
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / q
            diff = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if diff > 0:
                if a[j] < 0:
                    a[j] = 0.0
                    a[i] = diff
            else:
                if a[i] < 0:
                    a[i] = 0.0
                    a[j] = -diff
            if diff > 0:
                if a[i] > C:
                    a[i] = C
                    a[j] = C - diff
            else:
                if a[j] > C:
                    a[j] = C
                    a[i] = C + diff
        else:
            delta = (G[i] - G[j]) / q
            s = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if s > C:
                if a[i] > C:
                    a[i] = C
                    a[j] = s - C
            else:
                if a[j] < 0:
                    a[j] = 0.0
                    a[i] = s
            if s > C:
                if a[j] > C:
                    a[j] = C
                    a[i] = s - C
            else:
                if a[i] < 0:
                    a[i] = 0.0
                    a[j] = s
        di = a[i] - ai
        dj = a[j] - aj
        for t in range(n):
            G[t] += y[t] * (y[i] * K[t, i] * di + y[j] * K[t, j] * dj)

    # bias: average over free vectors, else midpoint of the feasible interval
    ub = np.inf
    lb = -np.inf
    total = 0.0
    n_free = 0
    for t in range(n):
        yg = y[t] * G[t]
        if a[t] >= C:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif a[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            n_free += 1
            total += yg
    rho = total / n_free if n_free > 0 else (ub + lb) / 2.0
    return a, rho, it, gap


def kernel_matrix(A: np.ndarray, B: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
    dot = A @ B.T
    if kernel == "linear":
        return dot
    if kernel == "rbf":
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * dot
        return np.exp(-gamma * np.maximum(sq, 0.0))
    raise ValueError(f"unknown kernel {kernel!r}")


def resolve_gamma(gamma: Union[str, float], X: np.ndarray) -> float:
    d = X.shape[1]
    if gamma == "auto":
        return 1.0 / d
    if gamma == "scale":
        var = float(X.var(axis=0).mean())
        return 1.0 / (d * var) if var > 0 else 1.0
    g = float(gamma)
    if g <= 0:
        raise ValueError("gamma must be positive")
    return g


@dataclass
class BinarySolution:
    alpha: np.ndarray
    rho: float
    iterations: int
    violation: float
    converged: bool


def solve_binary(K: np.ndarray, y: np.ndarray, C: float, tol: float = KKT_TOL,
                 max_passes: int = MAX_PASSES) -> BinarySolution:
    """Solve the soft-margin dual for labels in {-1, +1} given a kernel matrix.

    One pass is n working-pair updates, so the iteration cap is max_passes * n.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    max_iter = max_passes * max(n, 1)
    a, rho, it, gap = _smo(np.ascontiguousarray(K, dtype=float), y, float(C), float(tol), max_iter)
    return BinarySolution(a, float(rho), int(it), float(gap), bool(gap < tol))


def dual_objective(K: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    ya = y * alpha
    return float(alpha.sum() - 0.5 * ya @ K @ ya)


@dataclass
class SVM:
    n_classes: int
    C: float = 1.0
    kernel: str = "rbf"
    gamma: Union[str, float] = "scale"
    tol: float = KKT_TOL
    max_passes: int = MAX_PASSES
    gamma_value: float = 0.0
    support_vectors: Optional[np.ndarray] = field(default=None, repr=False)
    dual_coef: Optional[np.ndarray] = field(default=None, repr=False)  # (K, n_sv), alpha * y
    rho: Optional[np.ndarray] = None
    violations: list[float] = field(default_factory=list)

    family = "svm"

    def fit(self, X, y) -> "SVM":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if len(np.unique(y)) < 2:
            raise ValueError("SVM needs at least two classes in the training set")
        self.gamma_value = resolve_gamma(self.gamma, X) if self.kernel == "rbf" else 0.0
        K = kernel_matrix(X, X, self.kernel, self.gamma_value)
        coefs = np.zeros((self.n_classes, len(y)))
        self.rho = np.zeros(self.n_classes)
        self.violations = []
        for k in range(self.n_classes):
            yk = np.where(y == k, 1.0, -1.0)
            if (yk > 0).sum() == 0:
                # class absent from this training set: never predicted
                self.rho[k] = np.inf
                self.violations.append(0.0)
                continue
            sol = solve_binary(K, yk, self.C, self.tol, self.max_passes)
            if not sol.converged:
                msg = f"SMO for class {k} hit the pass cap; final KKT violation {sol.violation:.3g}"
                warnings.warn(msg, SvmConvergenceWarning, stacklevel=2)
                log.warning(msg)
            coefs[k] = sol.alpha * yk
            self.rho[k] = sol.rho
            self.violations.append(sol.violation)
        used = np.flatnonzero(np.abs(coefs).sum(axis=0) > 0)
        self.support_vectors = X[used]
        self.dual_coef = coefs[:, used]
        return self

    def scores(self, X) -> np.ndarray:
        """Raw one-vs-rest decision values, one column per class."""
        X = np.asarray(X, dtype=float)
        Kx = kernel_matrix(self.support_vectors, X, self.kernel, self.gamma_value)
        out = (self.dual_coef @ Kx).T - self.rho[None, :]
        return np.where(np.isfinite(out), out, -np.inf)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.scores(X), axis=1)

    def params(self) -> dict:
        return {"C": self.C, "kernel": self.kernel, "gamma": self.gamma}

    def fitted(self) -> dict:
        return {"gamma_value": self.gamma_value, "n_features": int(self.support_vectors.shape[1]),
                "support_vectors": self.support_vectors.tolist(),
                "dual_coef": self.dual_coef.tolist(),
                "rho": [r if np.isfinite(r) else None for r in self.rho.tolist()],
                "violations": self.violations}

    def load_fitted(self, d: dict) -> None:
        self.gamma_value = float(d["gamma_value"])
        sv = np.array(d["support_vectors"], dtype=float)
        self.dual_coef = np.array(d["dual_coef"], dtype=float).reshape(self.n_classes, -1)
        self.support_vectors = sv.reshape(self.dual_coef.shape[1], int(d["n_features"]))
        self.rho = np.array([np.inf if r is None else r for r in d["rho"]], dtype=float)
        self.violations = list(d.get("violations", []))
