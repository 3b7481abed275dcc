"""Patch-level crack/uncrack scoring. Positive class (1) is crack."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass
class ClassificationMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    flags: set[str] = field(default_factory=set)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = sorted(self.flags)
        return d


@dataclass(frozen=True)
class ClassWeights:
    w_pos: float
    w_neg: float


def confusion(labels: Sequence[int], preds: Sequence[int]) -> ConfusionMatrix:
    y = np.asarray(labels)
    p = np.asarray(preds)
    if y.ndim != 1 or p.ndim != 1 or len(y) != len(p):
        raise ValueError(f"labels and preds must be 1-D of equal length, got {y.shape} and {p.shape}")
    if len(y) == 0:
        raise ValueError("cannot score an empty sample")
    if not (np.isin(y, (0, 1)).all() and np.isin(p, (0, 1)).all()):
        raise ValueError("labels and preds must be 0 or 1")
    y, p = y.astype(bool), p.astype(bool)
    return ConfusionMatrix(
        tp=int((y & p).sum()),
        fp=int((~y & p).sum()),
        tn=int((~y & ~p).sum()),
        fn=int((y & ~p).sum()),
    )


def metrics(cm: ConfusionMatrix) -> ClassificationMetrics:
    """Accuracy, precision, recall and F1.

    A metric whose denominator is zero is reported as 0 and named in
    ``flags`` (``precision_zero_division`` etc.) instead of NaN.
    """
    if cm.total == 0:
        raise ValueError("confusion matrix is empty")
    flags = set()
    accuracy = (cm.tp + cm.tn) / cm.total
    if cm.tp + cm.fp:
        precision = cm.tp / (cm.tp + cm.fp)
    else:
        precision = 0.0
        flags.add("precision_zero_division")
    if cm.tp + cm.fn:
        recall = cm.tp / (cm.tp + cm.fn)
    else:
        recall = 0.0
        flags.add("recall_zero_division")
    if precision + recall:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        flags.add("f1_zero_division")
    return ClassificationMetrics(accuracy, precision, recall, f1, flags)


def class_weights(n_pos: int, n_neg: int) -> ClassWeights:
    """Balanced weights ``N / (2 * n_c)``, so ``w_pos * n_pos == w_neg * n_neg``."""
    if n_pos <= 0 or n_neg <= 0:
        raise ValueError(f"both class counts must be positive, got {n_pos} and {n_neg}")
    n = n_pos + n_neg
    return ClassWeights(w_pos=n / (2 * n_pos), w_neg=n / (2 * n_neg))
