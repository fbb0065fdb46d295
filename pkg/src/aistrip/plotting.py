"""Report figures written to files (headless Agg backend)."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps PNG bytes stable across runs
_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return path


def metric_bars(labels: Sequence[str], table: dict[str, Sequence[float]], path: Path) -> Path:
    """Grouped bars: one group per configuration, one bar per metric (percent)."""
    metrics = list(table)
    x = np.arange(len(labels))
    width = 0.8 / max(len(metrics), 1)
    fig, ax = plt.subplots(figsize=(max(6.0, 1.1 * len(labels) + 2), 4.2))
    for k, m in enumerate(metrics):
        ax.bar(x + (k - (len(metrics) - 1) / 2) * width, table[m], width, label=m)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("percent")
    ax.set_ylim(0, 122)  # headroom keeps the legend clear of 100% bars
    ax.set_yticks(range(0, 101, 20))
    ax.legend(fontsize=8, ncol=len(metrics), loc="upper center")
    ax.set_title("Test-set performance")
    return _save(fig, path)


def confusion_heatmap(confusion: np.ndarray, classes: Sequence[str], title: str, path: Path) -> Path:
    cm = np.asarray(confusion)
    fig, ax = plt.subplots(figsize=(4.8, 4.2))
    ax.imshow(cm, cmap="Blues")
    top = cm.max() if cm.size else 0
    for i in range(cm.shape[0]):
        for j in range(cm.shape[1]):
            ax.text(j, i, str(int(cm[i, j])), ha="center", va="center",
                    color="white" if top and cm[i, j] > top / 2 else "black", fontsize=8)
    ax.set_xticks(range(len(classes)))
    ax.set_yticks(range(len(classes)))
    ax.set_xticklabels(classes, rotation=45, ha="right", fontsize=8)
    ax.set_yticklabels(classes, fontsize=8)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(title, fontsize=9)
    return _save(fig, path)


def importance_bars(names: Sequence[str], values: Sequence[float], title: str, path: Path,
                    errors: Sequence[float] | None = None, top: int = 15) -> Path:
    values = np.asarray(values, dtype=float)
    order = sorted(range(len(names)), key=lambda j: (-values[j], j))[:top][::-1]
    fig, ax = plt.subplots(figsize=(6.0, 0.3 * len(order) + 1.2))
    ax.barh([names[j] for j in order], values[order],
            xerr=None if errors is None else np.asarray(errors)[order], color="tab:green")
    ax.tick_params(axis="y", labelsize=8)
    ax.set_title(title, fontsize=9)
    return _save(fig, path)
