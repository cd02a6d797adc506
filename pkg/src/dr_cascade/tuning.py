"""Validation sensitivity/specificity sweep and tier-1 operating-point selection."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateLabels, EmptyCurve, InputError
from .grading import ReferableLabel

DEFAULT_TARGET_SENSITIVITY = 0.99
DEFAULT_SWEEP_STEPS = 1001
# published edge operating point; used when no threshold is configured
REFERENCE_THRESHOLD = 0.6977
CURVE_HEADER = ("threshold", "sensitivity", "specificity", "forward_rate")


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    sensitivity: float
    specificity: float
    forward_rate: float


@dataclass(frozen=True)
class OperatingPoint:
    """A tier-1 threshold; an image is forwarded iff its referable score is >= threshold.

    Points chosen by :func:`select_operating_point` also carry the validation
    statistics that justified them. Fixed thresholds from configuration leave
    those fields ``None``.
    """

    threshold: float
    sensitivity: float | None = None
    specificity: float | None = None
    target_sensitivity: float | None = None
    best_effort: bool = False

    def __post_init__(self):
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite")

    @classmethod
    def fixed(cls, threshold: float) -> "OperatingPoint":
        return cls(float(threshold))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "OperatingPoint":
        try:
            obj = json.loads(text)
            return cls(**obj)
        except (json.JSONDecodeError, TypeError) as exc:
            raise InputError(f"invalid operating point JSON: {exc}") from None


def default_thresholds(steps: int = DEFAULT_SWEEP_STEPS) -> np.ndarray:
    if steps < 2:
        raise ValueError("need at least 2 sweep steps")
    return np.linspace(0.0, 1.0, steps)


def sweep_curve(
    scores: Sequence[tuple[float, ReferableLabel]],
    thresholds: Sequence[float] | None = None,
) -> list[CurvePoint]:
    """Sensitivity, specificity and forward rate at each threshold (predict referable iff score >= t)."""
    thresholds = default_thresholds() if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    if thresholds.size == 0:
        return []
    if np.any(np.diff(thresholds) <= 0):
        raise ValueError("thresholds must be strictly increasing")

    values = np.array([s for s, _ in scores], dtype=np.float64)
    positive = np.array([label is ReferableLabel.REFERABLE for _, label in scores], dtype=bool)
    n_pos = int(positive.sum())
    n_neg = int(positive.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("sweep needs at least one referable and one non-referable example")

    # count of scores >= t for each t, via sorted search on each class
    pos_sorted = np.sort(values[positive])
    neg_sorted = np.sort(values[~positive])
    tp = n_pos - np.searchsorted(pos_sorted, thresholds, side="left")
    fp = n_neg - np.searchsorted(neg_sorted, thresholds, side="left")
    n = n_pos + n_neg
    return [
        CurvePoint(float(t), int(tp_i) / n_pos, (n_neg - int(fp_i)) / n_neg, (int(tp_i) + int(fp_i)) / n)
        for t, tp_i, fp_i in zip(thresholds, tp, fp)
    ]


def select_operating_point(curve: Sequence[CurvePoint], target_sensitivity: float = DEFAULT_TARGET_SENSITIVITY) -> OperatingPoint:
    """Highest specificity among points meeting the sensitivity target; ties go to the larger threshold.

    If no point meets the target, the highest-sensitivity point is returned
    flagged ``best_effort``.
    """
    if not curve:
        raise EmptyCurve("cannot select an operating point from an empty curve")
    eligible = [p for p in curve if p.sensitivity >= target_sensitivity]
    if eligible:
        best = max(eligible, key=lambda p: (p.specificity, p.threshold))
        best_effort = False
    else:
        best = max(curve, key=lambda p: (p.sensitivity, p.specificity, p.threshold))
        best_effort = True
    return OperatingPoint(best.threshold, best.sensitivity, best.specificity, target_sensitivity, best_effort)


def curve_to_csv(curve: Sequence[CurvePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_HEADER)
    for p in curve:
        writer.writerow((repr(p.threshold), repr(p.sensitivity), repr(p.specificity), repr(p.forward_rate)))
    return buf.getvalue()
