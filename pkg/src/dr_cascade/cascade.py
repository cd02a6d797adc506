"""Per-image routing through the edge triage gate and final deployed-label assignment."""

from __future__ import annotations

import enum
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InputError, MissingTier2Score
from .grading import DeployedClass, check_grade, to_deployed
from .scores import ScoreProvider, severity_grade, triage_score
from .tuning import OperatingPoint

# threshold 0 forwards everything: sigmoid output is never negative
CLOUD_ONLY = OperatingPoint.fixed(0.0)


class Provenance(enum.Enum):
    STOPPED_LOCAL = "stopped_local"
    CLOUD_GRADED = "cloud_graded"


@dataclass(frozen=True)
class RoutingDecision:
    image_id: str
    triage_score: float
    forwarded: bool
    threshold_used: float


@dataclass(frozen=True)
class CascadeOutcome:
    image_id: str
    decision: RoutingDecision
    tier2_grade: int | None
    deployed: DeployedClass
    provenance: Provenance

    @property
    def forwarded(self) -> bool:
        return self.decision.forwarded

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "forwarded": self.decision.forwarded,
            "triage_score": self.decision.triage_score,
            "tier2_grade": self.tier2_grade,
            "deployed_class": self.deployed.label,
            "provenance": self.provenance.value,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def make_decision(image_id: str, score: float, threshold: float) -> RoutingDecision:
    return RoutingDecision(image_id, score, score >= threshold, threshold)


def make_outcome(decision: RoutingDecision, tier2_grade: int | None, override: bool = True) -> CascadeOutcome:
    """Assemble the outcome for a routing decision and (if forwarded) the cloud grade.

    With ``override`` off, a forwarded image is floored at Class 2 instead of
    being returned to the non-referable class by the cloud grade.
    """
    if not decision.forwarded:
        return CascadeOutcome(decision.image_id, decision, None, DeployedClass.CLASS01, Provenance.STOPPED_LOCAL)
    if tier2_grade is None:
        raise MissingTier2Score(decision.image_id)
    deployed = to_deployed(check_grade(tier2_grade))
    if not override:
        deployed = max(deployed, DeployedClass.CLASS2)
    return CascadeOutcome(decision.image_id, decision, tier2_grade, deployed, Provenance.CLOUD_GRADED)


def route(image_id: str, provider: ScoreProvider, op_point: OperatingPoint) -> RoutingDecision:
    return make_decision(image_id, triage_score(provider, image_id), op_point.threshold)


def finalize(decision: RoutingDecision, provider: ScoreProvider, override: bool = True) -> CascadeOutcome:
    grade = severity_grade(provider, decision.image_id) if decision.forwarded else None
    return make_outcome(decision, grade, override)


def run_cascade(
    ids: Iterable[str],
    provider: ScoreProvider,
    op_point: OperatingPoint,
    override: bool = True,
    workers: int = 1,
) -> list[CascadeOutcome]:
    """Route and finalize every id; outcomes come back in input order.

    The first failing image aborts the run; its error names the image id.
    """
    ids = list(ids)

    def one(image_id: str) -> CascadeOutcome:
        return finalize(route(image_id, provider, op_point), provider, override)

    if workers <= 1:
        return [one(i) for i in ids]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, ids))


def forward_count(outcomes: Sequence[CascadeOutcome]) -> int:
    return sum(o.provenance is Provenance.CLOUD_GRADED for o in outcomes)


def outcomes_to_jsonl(outcomes: Iterable[CascadeOutcome]) -> str:
    return "".join(o.to_json() + "\n" for o in outcomes)


def outcomes_from_jsonl(text: str) -> list[CascadeOutcome]:
    """Parse exported outcomes back; the threshold is not part of the export and is left NaN."""
    outcomes = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            decision = RoutingDecision(obj["image_id"], float(obj["triage_score"]), bool(obj["forwarded"]), float("nan"))
            provenance = Provenance(obj["provenance"])
            grade = obj["tier2_grade"]
            deployed = DeployedClass.from_label(obj["deployed_class"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"outcomes line {lineno}: {exc}") from None
        if (provenance is Provenance.CLOUD_GRADED) != decision.forwarded:
            raise InputError(f"outcomes line {lineno}: provenance disagrees with forwarded flag")
        outcomes.append(CascadeOutcome(decision.image_id, decision, grade, deployed, provenance))
    return outcomes
