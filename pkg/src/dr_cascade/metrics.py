"""Evaluation arithmetic: confusion matrices, binary rates, accuracy, quadratic weighted kappa, cloud-call rate."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateMarginals,
    EmptyMatrix,
    EmptyOutcomes,
    NoNegatives,
    NoPositives,
    RankOutOfRange,
    WrongDimension,
)
from .grading import DEPLOYED_LABELS, GRADES

BINARY_LABELS = ("non_referable", "referable")
GRADE_LABELS = tuple(str(g) for g in GRADES)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with rows = true class and columns = predicted class, both in ordinal-rank order."""

    counts: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1] or counts.shape[0] < 1:
            raise WrongDimension(f"confusion matrix must be square, got shape {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("confusion counts must be non-negative")
        counts.setflags(write=False)
        labels = tuple(self.labels) or tuple(str(i) for i in range(counts.shape[0]))
        if len(labels) != counts.shape[0]:
            raise ValueError("one label per class required")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "labels", labels)

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["true\\pred", *self.labels])
        for label, row in zip(self.labels, self.counts):
            writer.writerow([label, *(int(c) for c in row)])
        return buf.getvalue()

    def to_list(self) -> list[list[int]]:
        return self.counts.tolist()


def confusion_from_pairs(pairs: Iterable[tuple[int, int]], k: int, labels: Sequence[str] = ()) -> ConfusionMatrix:
    counts = np.zeros((k, k), dtype=np.int64)
    for true, pred in pairs:
        if not (0 <= true < k and 0 <= pred < k):
            raise RankOutOfRange(f"pair ({true}, {pred}) outside 0..{k - 1}")
        counts[true, pred] += 1
    return ConfusionMatrix(counts, tuple(labels))


def _binary(cm: ConfusionMatrix) -> tuple[int, int, int, int]:
    if cm.k != 2:
        raise WrongDimension(f"expected a binary matrix, got {cm.k} classes")
    (tn, fp), (fn, tp) = cm.counts.tolist()
    return tn, fp, fn, tp


def sensitivity(cm: ConfusionMatrix) -> float:
    _, _, fn, tp = _binary(cm)
    if tp + fn == 0:
        raise NoPositives("sensitivity undefined without positive cases")
    return tp / (tp + fn)


def specificity(cm: ConfusionMatrix) -> float:
    tn, fp, _, _ = _binary(cm)
    if tn + fp == 0:
        raise NoNegatives("specificity undefined without negative cases")
    return tn / (tn + fp)


def accuracy(cm: ConfusionMatrix) -> float:
    n = cm.total
    if n == 0:
        raise EmptyMatrix("accuracy undefined on an empty matrix")
    return int(np.trace(cm.counts)) / n


def quadratic_weight_matrix(k: int) -> np.ndarray:
    idx = np.arange(k, dtype=np.float64)
    return (idx[:, None] - idx[None, :]) ** 2 / (k - 1) ** 2


def quadratic_weighted_kappa(cm: ConfusionMatrix) -> float:
    """1 - sum(w * observed) / sum(w * expected), with w_ij = (i - j)^2 / (K - 1)^2."""
    if cm.k < 2:
        raise WrongDimension("kappa needs at least 2 classes")
    n = cm.total
    if n == 0:
        raise EmptyMatrix("kappa undefined on an empty matrix")
    observed = cm.counts.astype(np.float64)
    expected = np.outer(observed.sum(axis=1), observed.sum(axis=0)) / n
    w = quadratic_weight_matrix(cm.k)
    denom = float((w * expected).sum())
    if denom == 0.0:
        raise DegenerateMarginals("expected weighted disagreement is zero")
    return 1.0 - float((w * observed).sum()) / denom


def collapse_to_deployed(cm5: ConfusionMatrix) -> ConfusionMatrix:
    """Merge grades 0 and 1 (rows and columns) into the deployed non-referable class."""
    if cm5.k != 5:
        raise WrongDimension(f"expected a 5-class matrix, got {cm5.k}")
    # grade g -> deployed rank max(g - 1, 0)
    fold = np.array([[1, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=np.int64)
    return ConfusionMatrix(fold.T @ cm5.counts @ fold, DEPLOYED_LABELS)


@dataclass(frozen=True)
class CloudCallRate:
    forwarded: int
    total: int
    x: float = field(init=False)
    y: float = field(init=False)

    def __post_init__(self):
        x = 100.0 * self.forwarded / self.total
        object.__setattr__(self, "x", x)
        # defined from x, so y == 100 - x holds exactly as floats
        object.__setattr__(self, "y", 100.0 - x)


def cloud_call_rate(outcomes: Sequence) -> CloudCallRate:
    """Percent of images forwarded to the cloud stage (X) and its complement (Y)."""
    if not outcomes:
        raise EmptyOutcomes("cloud-call rate undefined without outcomes")
    forwarded = sum(1 for o in outcomes if o.forwarded)
    return CloudCallRate(forwarded, len(outcomes))


def format_percent(fraction_or_percent: float, *, already_percent: bool = False) -> str:
    """Two-decimal, half-up rounded percentage string such as ``'49.52%'``."""
    pct = fraction_or_percent if already_percent else fraction_or_percent * 100.0
    d = Decimal(repr(pct)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return f"{d}%"


def format_kappa(kappa: float) -> str:
    return str(Decimal(repr(kappa)).quantize(Decimal("0.0001"), rounding=ROUND_HALF_UP))
