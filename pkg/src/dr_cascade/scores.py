"""Score providers: replayable stand-ins for the tier-1 triage and tier-2 grading models.

A provider maps ``image_id`` to a :class:`ScoreRecord`. Real model owners export
line-delimited JSON::

    {"image_id": "abc", "tier1_logit": 1.23, "tier2_score": 2.7}

``tier2_score`` may be ``null`` for images that were never graded.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

from .errors import (
    CapabilityMissing,
    DuplicateId,
    MissingTier2Score,
    NonFiniteScore,
    ParseError,
    UnknownId,
)
from .grading import CohortManifest

# tier-1 logit per true grade for the synthetic provider; grades 0-1 sit at least
# 1.5 logits below sigmoid^-1(0.6977) ~ 0.836 and grades 2-4 above it
SYNTHETIC_TIER1_BASE = (-3.0, -1.5, 1.5, 3.0, 4.0)
SYNTHETIC_TIER2_NOISE_SCALE = 0.6


def sigmoid(z: float) -> float:
    if not math.isfinite(z):
        raise NonFiniteScore(f"logit {z!r} is not finite")
    # branch keeps exp() from overflowing for large |z|
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def round_clip_grade(score: float) -> int:
    """Round half away from zero, then clamp to the ICDR range 0..4."""
    if not math.isfinite(score):
        raise NonFiniteScore(f"severity score {score!r} is not finite")
    rounded = math.floor(abs(score) + 0.5)
    rounded = rounded if score >= 0 else -rounded
    return int(min(max(rounded, 0), 4))


def _check_finite(value: float, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise NonFiniteScore(f"{what} {value!r} is not a finite number")
    return float(value)


@dataclass(frozen=True)
class ScoreRecord:
    image_id: str
    tier1_logit: float
    tier2_score: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "tier1_logit", _check_finite(self.tier1_logit, "tier1_logit"))
        if self.tier2_score is not None:
            object.__setattr__(self, "tier2_score", _check_finite(self.tier2_score, "tier2_score"))

    def to_json(self) -> str:
        return json.dumps(
            {"image_id": self.image_id, "tier1_logit": self.tier1_logit, "tier2_score": self.tier2_score}
        )


class ScoreProvider:
    """Read-only table of per-image scores.

    ``has_tier1``/``has_tier2`` advertise which stages this provider can serve;
    asking for a missing capability raises :class:`CapabilityMissing` rather
    than inventing a score. By default tier 2 is available when at least one
    record carries a tier-2 score; ids without one raise :class:`MissingTier2Score`.
    """

    def __init__(self, records: Iterable[ScoreRecord], *, has_tier1: bool = True, has_tier2: bool | None = None):
        table: dict[str, ScoreRecord] = {}
        for rec in records:
            if rec.image_id in table:
                raise DuplicateId(rec.image_id)
            table[rec.image_id] = rec
        self._records = table
        self.has_tier1 = has_tier1
        if has_tier2 is None:
            has_tier2 = any(r.tier2_score is not None for r in table.values())
        self.has_tier2 = has_tier2

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, image_id: object) -> bool:
        return image_id in self._records

    def __iter__(self) -> Iterator[ScoreRecord]:
        return iter(self._records.values())

    def record(self, image_id: str) -> ScoreRecord:
        try:
            return self._records[image_id]
        except KeyError:
            raise UnknownId(image_id) from None

    def tier1_logit(self, image_id: str) -> float:
        if not self.has_tier1:
            raise CapabilityMissing("provider has no tier-1 scores")
        return self.record(image_id).tier1_logit

    def tier2_score(self, image_id: str) -> float:
        if not self.has_tier2:
            raise CapabilityMissing("provider has no tier-2 scores")
        score = self.record(image_id).tier2_score
        if score is None:
            raise MissingTier2Score(image_id)
        return score

    def dump_jsonl(self) -> str:
        return "".join(rec.to_json() + "\n" for rec in self._records.values())


def triage_score(provider: ScoreProvider, image_id: str) -> float:
    """Referable probability: sigmoid of the tier-1 ordinal logit."""
    return sigmoid(provider.tier1_logit(image_id))


def severity_grade(provider: ScoreProvider, image_id: str) -> int:
    return round_clip_grade(provider.tier2_score(image_id))


def load_score_file(source: TextIO | str) -> ScoreProvider:
    text = source if isinstance(source, str) else source.read()
    records: list[ScoreRecord] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise ParseError(lineno, "expected a JSON object")
        image_id = obj.get("image_id")
        if not isinstance(image_id, str) or not image_id:
            raise ParseError(lineno, "image_id must be a non-empty string")
        if "tier1_logit" not in obj:
            raise ParseError(lineno, "missing tier1_logit")
        if image_id in seen:
            raise DuplicateId(image_id, lineno)
        seen.add(image_id)
        try:
            records.append(ScoreRecord(image_id, obj["tier1_logit"], obj.get("tier2_score")))
        except NonFiniteScore as exc:
            raise ParseError(lineno, str(exc)) from None
    return ScoreProvider(records)


def _hash_uniforms(seed: int, image_id: str) -> tuple[float, float]:
    """Two uniforms in [-1, 1] derived from (seed, image_id); stable across runs and platforms."""
    digest = hashlib.blake2b(f"{seed}:{image_id}".encode(), digest_size=16).digest()
    a = int.from_bytes(digest[:8], "little")
    b = int.from_bytes(digest[8:], "little")
    scale = 2.0 / ((1 << 64) - 1)
    return a * scale - 1.0, b * scale - 1.0


def synthetic_provider(manifest: CohortManifest, noise_amplitude: float = 0.0, seed: int = 0) -> ScoreProvider:
    """Scores drawn around grade-dependent centers; with zero noise routing and grading are perfect."""
    if not noise_amplitude >= 0:
        raise ValueError("noise_amplitude must be >= 0")
    records = []
    for rec in manifest.records:
        u1, u2 = _hash_uniforms(seed, rec.image_id)
        records.append(
            ScoreRecord(
                rec.image_id,
                SYNTHETIC_TIER1_BASE[rec.grade] + noise_amplitude * u1,
                rec.grade + SYNTHETIC_TIER2_NOISE_SCALE * noise_amplitude * u2,
            )
        )
    return ScoreProvider(records)
