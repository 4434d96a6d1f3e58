"""Accuracy and macro-averaged F1 over a fixed label inventory."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


@dataclass
class RunMetrics:
    """Evaluation result for one (variant, split, seed) combination."""

    split: str
    accuracy: float
    macro_f1: float
    seed: int = 0
    epochs_run: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _as_label_arrays(gold, pred) -> tuple[np.ndarray, np.ndarray]:
    gold = np.asarray(gold, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if gold.ndim != 1 or gold.shape != pred.shape:
        raise ValueError(
            f"gold and pred must be 1-d arrays of equal length, got {gold.shape} vs {pred.shape}"
        )
    if gold.size == 0:
        raise ValueError("cannot compute metrics over zero predictions")
    return gold, pred


def confusion_matrix(gold, pred, n_classes: int) -> np.ndarray:
    """Counts indexed [gold label, predicted label]."""
    gold, pred = _as_label_arrays(gold, pred)
    for name, arr in (("gold", gold), ("pred", pred)):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise ValueError(
                f"{name} labels must lie in [0, {n_classes}), got range [{arr.min()}, {arr.max()}]"
            )
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (gold, pred), 1)
    return cm


def accuracy(gold, pred) -> float:
    """Fraction of predictions equal to the gold label."""
    gold, pred = _as_label_arrays(gold, pred)
    return float(np.mean(gold == pred))


def per_class_f1(gold, pred, n_classes: int) -> np.ndarray:
    """Per-class F1; a class absent from both gold and predictions scores 0."""
    cm = confusion_matrix(gold, pred, n_classes)
    tp = np.diag(cm).astype(np.float64)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    f1 = np.zeros(n_classes, dtype=np.float64)
    for k in range(n_classes):
        precision = tp[k] / (tp[k] + fp[k]) if tp[k] + fp[k] > 0 else 0.0
        recall = tp[k] / (tp[k] + fn[k]) if tp[k] + fn[k] > 0 else 0.0
        if precision + recall > 0:
            f1[k] = 2.0 * precision * recall / (precision + recall)
    return f1


def macro_f1(gold, pred, n_classes: int) -> float:
    """Unweighted mean of per-class F1 over all ``n_classes`` classes."""
    return float(np.mean(per_class_f1(gold, pred, n_classes)))
