"""Independent brute-force reference implementations used by the test suite.

None of these share code with the package; they exist to cross-check it.
"""
import itertools
import math

import numpy as np


def cosine_law_km(lat1, lon1, lat2, lon2, radius=6371.0):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    c = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return radius * math.acos(max(-1.0, min(1.0, c)))


def winding_number(x, y, xs, ys):
    """Winding number by summing signed subtended angles."""
    total = 0.0
    n = len(xs)
    for i in range(n):
        ax, ay = xs[i] - x, ys[i] - y
        bx, by = xs[(i + 1) % n] - x, ys[(i + 1) % n] - y
        total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
    return round(total / (2 * math.pi))


def gini(counts):
    n = sum(counts)
    if n == 0:
        return 0.0
    return 1.0 - sum((c / n) ** 2 for c in counts)


def best_split_bruteforce(X, y, n_classes):
    """Minimum weighted child Gini over every (feature, midpoint) pair."""
    n, d = X.shape
    best = (math.inf, None, None)
    for f in range(d):
        vals = sorted(set(X[:, f]))
        for lo, hi in zip(vals, vals[1:]):
            t = (lo + hi) / 2
            left = [int(np.sum((X[:, f] <= t) & (y == k))) for k in range(n_classes)]
            right = [int(np.sum((X[:, f] > t) & (y == k))) for k in range(n_classes)]
            score = (sum(left) * gini(left) + sum(right) * gini(right)) / n
            if score < best[0]:
                best = (score, f, t)
    return best


def auc_pairs(scores, positive):
    """AUC by counting every (positive, negative) pair; ties score 0.5."""
    pos = [s for s, p in zip(scores, positive) if p]
    neg = [s for s, p in zip(scores, positive) if not p]
    wins = 0.0
    for a, b in itertools.product(pos, neg):
        wins += 1.0 if a > b else 0.5 if a == b else 0.0
    return wins / (len(pos) * len(neg))


def count_metrics(y_true, y_pred, classes):
    """Per-class (precision, recall, f1) by explicit counting."""
    out = {}
    for c in classes:
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        out[c] = (prec, rec, f1)
    return out


def point_segment_distance(p, a, b):
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.linalg.norm(p - (a + t * ab)))


def svm_dual_grid(K, y, C, steps=41, rounds=40):
    """Maximize the binary soft-margin dual by dense grid search with zooming.

    Only valid for four points with labels (+, +, -, -). The equality
    constraint forces equal class sums s, leaving the free variables
    (s, a0, a2) with alpha = (a0, s - a0, a2, s - a2). Each round evaluates
    a dense grid over a box around the incumbent and halves the box; the
    dual is concave, so this converges to the global maximum.
    Returns (best objective, alpha vector).
    """
    Q = (y[:, None] * y[None, :]) * K
    center = np.array([C, C / 2, C / 2])
    half = np.array([C, C / 2, C / 2])
    best = (-math.inf, None)
    for _ in range(rounds):
        axes = [np.linspace(c - h, c + h, steps) for c, h in zip(center, half)]
        s, a0, a2 = (g.ravel() for g in np.meshgrid(*axes, indexing="ij"))
        A = np.stack([a0, s - a0, a2, s - a2], axis=1)
        ok = (A >= 0).all(1) & (A <= C).all(1)
        A = A[ok]
        obj = A.sum(1) - 0.5 * np.einsum("ni,ij,nj->n", A, Q, A)
        k = int(np.argmax(obj))
        if obj[k] >= best[0]:
            best = (float(obj[k]), A[k].copy())
        center = np.array([best[1][0] + best[1][1], best[1][0], best[1][2]])
        half = half / 2
    return best


def min_segment_distance(p, points):
    """Distance from p to the nearest segment joining two distinct rows of ``points``."""
    a = points[:, None, :]
    b = points[None, :, :]
    ab = b - a
    denom = (ab ** 2).sum(-1)
    t = np.where(denom > 0, ((p - a) * ab).sum(-1) / np.where(denom > 0, denom, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    d = np.linalg.norm(p - (a + t[..., None] * ab), axis=-1)
    np.fill_diagonal(d, np.inf)
    return float(d.min())
