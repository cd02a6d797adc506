"""Score a set of cascade outcomes against manifest ground truth."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .cascade import CascadeOutcome
from .errors import DegenerateMarginals, EmptyOutcomes, UnknownId
from .grading import DEPLOYED_LABELS, CohortManifest, to_deployed, to_referable
from .metrics import (
    BINARY_LABELS,
    GRADE_LABELS,
    CloudCallRate,
    ConfusionMatrix,
    accuracy,
    cloud_call_rate,
    confusion_from_pairs,
    format_kappa,
    format_percent,
    quadratic_weighted_kappa,
    sensitivity,
    specificity,
)


def _kappa_or_none(cm: ConfusionMatrix) -> float | None:
    try:
        return quadratic_weighted_kappa(cm)
    except DegenerateMarginals:
        return None


@dataclass(frozen=True)
class MetricsReport:
    deployed_cm: ConfusionMatrix
    triage_cm: ConfusionMatrix
    rate: CloudCallRate
    accuracy: float
    kappa: float | None
    sensitivity: float | None
    specificity: float | None
    triage_accuracy: float
    # 5-class tier-2 view; only defined when every image was graded in the cloud
    grade_cm: ConfusionMatrix | None = None
    grade_accuracy: float | None = None
    grade_kappa: float | None = None

    @property
    def n_images(self) -> int:
        return self.rate.total

    def display(self) -> dict[str, str | None]:
        def pct(v):
            return None if v is None else format_percent(v)

        def kap(v):
            return None if v is None else format_kappa(v)

        return {
            "accuracy": pct(self.accuracy),
            "kappa": kap(self.kappa),
            "cloud_call_rate": format_percent(self.rate.x, already_percent=True),
            "image_count_saving": format_percent(self.rate.y, already_percent=True),
            "sensitivity": pct(self.sensitivity),
            "specificity": pct(self.specificity),
            "triage_accuracy": pct(self.triage_accuracy),
            "grade_accuracy": pct(self.grade_accuracy),
            "grade_kappa": kap(self.grade_kappa),
        }

    def to_dict(self) -> dict:
        return {
            "n_images": self.n_images,
            "forwarded": self.rate.forwarded,
            "accuracy": self.accuracy,
            "kappa": self.kappa,
            "cloud_call_rate": self.rate.x,
            "image_count_saving": self.rate.y,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "triage_accuracy": self.triage_accuracy,
            "grade_accuracy": self.grade_accuracy,
            "grade_kappa": self.grade_kappa,
            "confusion": {
                "deployed": {"labels": list(self.deployed_cm.labels), "counts": self.deployed_cm.to_list()},
                "triage": {"labels": list(self.triage_cm.labels), "counts": self.triage_cm.to_list()},
                "grade": None
                if self.grade_cm is None
                else {"labels": list(self.grade_cm.labels), "counts": self.grade_cm.to_list()},
            },
            "display": self.display(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def summary(self) -> str:
        d = self.display()
        lines = [
            f"images evaluated      {self.n_images}",
            f"forwarded to cloud    {self.rate.forwarded}",
            f"cloud-call rate X     {d['cloud_call_rate']}",
            f"image-count saving Y  {d['image_count_saving']}",
            f"4-class accuracy      {d['accuracy']}",
            f"4-class kappa         {d['kappa']}",
            f"triage sensitivity    {d['sensitivity']}",
            f"triage specificity    {d['specificity']}",
            f"triage accuracy       {d['triage_accuracy']}",
        ]
        if self.grade_cm is not None:
            lines += [
                f"5-class accuracy      {d['grade_accuracy']}",
                f"5-class kappa         {d['grade_kappa']}",
            ]
        return "\n".join(lines) + "\n"


def evaluate(outcomes: Sequence[CascadeOutcome], manifest: CohortManifest) -> MetricsReport:
    if not outcomes:
        raise EmptyOutcomes("no outcomes to evaluate")
    truth = []
    for o in outcomes:
        if o.image_id not in manifest:
            raise UnknownId(o.image_id)
        truth.append(manifest.grade_of(o.image_id))

    deployed_cm = confusion_from_pairs(
        ((to_deployed(g).value, o.deployed.value) for g, o in zip(truth, outcomes)), 4, DEPLOYED_LABELS
    )
    triage_cm = confusion_from_pairs(
        ((to_referable(g).rank, int(o.forwarded)) for g, o in zip(truth, outcomes)), 2, BINARY_LABELS
    )
    (tn, fp), (fn, tp) = triage_cm.to_list()

    grade_cm = grade_acc = grade_kappa = None
    if all(o.tier2_grade is not None for o in outcomes):
        grade_cm = confusion_from_pairs(((g, o.tier2_grade) for g, o in zip(truth, outcomes)), 5, GRADE_LABELS)
        grade_acc = accuracy(grade_cm)
        grade_kappa = _kappa_or_none(grade_cm)

    return MetricsReport(
        deployed_cm=deployed_cm,
        triage_cm=triage_cm,
        rate=cloud_call_rate(outcomes),
        accuracy=accuracy(deployed_cm),
        kappa=_kappa_or_none(deployed_cm),
        sensitivity=sensitivity(triage_cm) if tp + fn else None,
        specificity=specificity(triage_cm) if tn + fp else None,
        triage_accuracy=accuracy(triage_cm),
        grade_cm=grade_cm,
        grade_accuracy=grade_acc,
        grade_kappa=grade_kappa,
    )
