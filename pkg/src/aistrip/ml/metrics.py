"""Confusion matrix, per-class and macro metrics, one-vs-rest ROC AUC."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError("label vectors differ in length")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def _ratio(num: float, den: float) -> tuple[float, bool]:
    return (num / den, False) if den > 0 else (0.0, True)


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    flags: list[str] = field(default_factory=list)


@dataclass
class EvalReport:
    classes: list[str]
    confusion: np.ndarray
    accuracy: float
    per_class: dict[str, ClassMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    auc_macro: Optional[float] = None
    auc_per_class: dict[str, float] = field(default_factory=dict)
    auc_skipped: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "classes": self.classes,
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "auc_macro": self.auc_macro,
            "auc_per_class": self.auc_per_class,
            "auc_skipped": self.auc_skipped,
            "confusion": self.confusion.tolist(),
            "per_class": {
                c: {"precision": m.precision, "recall": m.recall, "f1": m.f1,
                    "support": m.support, "flags": m.flags}
                for c, m in self.per_class.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            classes=list(d["classes"]),
            confusion=np.array(d["confusion"], dtype=np.int64),
            accuracy=d["accuracy"],
            per_class={c: ClassMetrics(m["precision"], m["recall"], m["f1"], m["support"], list(m["flags"]))
                       for c, m in d["per_class"].items()},
            macro_precision=d["macro_precision"],
            macro_recall=d["macro_recall"],
            macro_f1=d["macro_f1"],
            auc_macro=d.get("auc_macro"),
            auc_per_class=dict(d.get("auc_per_class", {})),
            auc_skipped=list(d.get("auc_skipped", [])),
        )


def evaluate(y_true, y_pred, classes: Sequence[str], scores: Optional[np.ndarray] = None) -> EvalReport:
    """Accuracy, per-class and macro precision/recall/F1; OvR AUC when scores are given.

    A metric whose denominator is zero is reported as 0 and flagged. Macro
    values average over the classes present in the truth or the predictions.
    """
    classes = list(classes)
    K = len(classes)
    cm = confusion_matrix(y_true, y_pred, K)
    total = int(cm.sum())
    tp = np.diag(cm).astype(float)
    per_class = {}
    for k, name in enumerate(classes):
        flags = []
        prec, bad = _ratio(tp[k], cm[:, k].sum())
        if bad:
            flags.append("precision_undefined")
        rec, bad = _ratio(tp[k], cm[k, :].sum())
        if bad:
            flags.append("recall_undefined")
        f1, bad = _ratio(2 * prec * rec, prec + rec)
        if bad:
            flags.append("f1_undefined")
        per_class[name] = ClassMetrics(prec, rec, f1, int(cm[k, :].sum()), flags)
    # classes that never occur in either vector carry no evidence and stay out of the means
    seen = [classes[k] for k in range(K) if cm[k, :].sum() + cm[:, k].sum() > 0] or classes
    for name in classes:
        if name not in seen:
            per_class[name].flags.append("absent")
    report = EvalReport(
        classes=classes,
        confusion=cm,
        accuracy=float(tp.sum() / total) if total else 0.0,
        per_class=per_class,
        macro_precision=float(np.mean([per_class[c].precision for c in seen])),
        macro_recall=float(np.mean([per_class[c].recall for c in seen])),
        macro_f1=float(np.mean([per_class[c].f1 for c in seen])),
    )
    if scores is not None:
        macro, per, skipped = roc_auc_ovr(scores, y_true, K)
        report.auc_macro = macro
        report.auc_per_class = {classes[k]: v for k, v in per.items()}
        report.auc_skipped = [classes[k] for k in skipped]
    return report


def average_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with tied values sharing their mean rank."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ranks = np.empty(len(x))
    start = 0
    n = len(x)
    while start < n:
        stop = start + 1
        while stop < n and xs[stop] == xs[start]:
            stop += 1
        ranks[order[start:stop]] = (start + stop + 1) / 2.0
        start = stop
    return ranks


def binary_auc(scores, positive) -> float:
    """Mann-Whitney U normalized by n_pos * n_neg; ties earn half credit."""
    positive = np.asarray(positive, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both positives and negatives")
    r = average_ranks(scores)
    u = r[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_auc_ovr(scores, y_true, n_classes: Optional[int] = None):
    """Macro one-vs-rest AUC.

    Returns (macro, {class: auc}, [skipped classes]); classes that are absent
    from the truth (or cover every row) are skipped.
    """
    scores = np.asarray(scores, dtype=float)
    y_true = np.asarray(y_true, dtype=np.int64)
    K = scores.shape[1] if n_classes is None else n_classes
    per, skipped = {}, []
    for k in range(K):
        pos = y_true == k
        if not pos.any() or pos.all():
            skipped.append(k)
            continue
        col = scores[:, k]
        # -inf scores (never-predicted classes) rank below everything, ties included
        col = np.where(np.isfinite(col), col, np.finfo(float).min)
        per[k] = binary_auc(col, pos)
    macro = float(np.mean(list(per.values()))) if per else None
    return macro, per, skipped
