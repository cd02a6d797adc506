"""Stratified train/validation/test partitioning with a portable, seeded shuffle."""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterator, Mapping, TextIO

from .errors import EmptyManifest, FractionOutOfRange, InputError, ParseError, UnknownId
from .grading import GRADES, CohortManifest, ReferableLabel, to_referable

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
SUBSETS = ("train", "val", "test")


def splitmix64(state: int) -> Iterator[int]:
    """Infinite splitmix64 stream starting from a 64-bit state."""
    state &= MASK64
    while True:
        state = (state + GOLDEN_GAMMA) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        yield z ^ (z >> 31)


def fisher_yates(items: list, stream: Iterator[int]) -> list:
    """Shuffle a copy of ``items``, swapping position i with ``next % (i + 1)`` from the top down."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = next(stream) % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def round_half_up(x: Decimal) -> int:
    return int(x.quantize(Decimal(1), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.20
    val_fraction_of_remainder: float = 0.20
    seed: int = 42

    def __post_init__(self):
        for name in ("test_fraction", "val_fraction_of_remainder"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise FractionOutOfRange(f"{name}={value} must lie strictly between 0 and 1")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def subset_sizes(self, n: int) -> tuple[int, int, int]:
        """(train, val, test) sizes for a class of ``n`` images."""
        # Decimal(str(...)) so that e.g. 0.2 * 1805 is exactly 361, not 360.99999...
        n_test = round_half_up(Decimal(str(self.test_fraction)) * n)
        n_val = round_half_up(Decimal(str(self.val_fraction_of_remainder)) * (n - n_test))
        return n - n_test - n_val, n_val, n_test


@dataclass(frozen=True)
class SplitAssignment:
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]

    def subset(self, name: str) -> tuple[str, ...]:
        if name not in SUBSETS:
            raise ValueError(f"unknown subset {name!r}")
        return getattr(self, name)

    def to_json(self) -> str:
        return json.dumps({name: list(self.subset(name)) for name in SUBSETS}, indent=1)

    @classmethod
    def from_json(cls, source: TextIO | str) -> "SplitAssignment":
        text = source if isinstance(source, str) else source.read()
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.lineno, exc.msg) from None
        if not isinstance(obj, dict) or set(SUBSETS) - obj.keys():
            raise InputError("split file must be an object with train, val and test lists")
        subsets = {}
        for name in SUBSETS:
            ids = obj[name]
            if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
                raise InputError(f"split subset {name!r} must be a list of strings")
            subsets[name] = tuple(ids)
        return cls(**subsets)


def stratified_split(manifest: CohortManifest, spec: SplitSpec = SplitSpec()) -> SplitAssignment:
    """Per-grade seeded shuffle; the first ids go to test, the next to val, the rest to train.

    Ids are sorted before shuffling, so the result does not depend on manifest row order.
    """
    if len(manifest) == 0:
        raise EmptyManifest("cannot split an empty manifest")
    by_grade: dict[int, list[str]] = {g: [] for g in GRADES}
    for rec in manifest.records:
        by_grade[rec.grade].append(rec.image_id)

    train: list[str] = []
    val: list[str] = []
    test: list[str] = []
    for grade in GRADES:
        ids = sorted(by_grade[grade])
        if not ids:
            continue
        stream = splitmix64(((spec.seed * GOLDEN_GAMMA) & MASK64) ^ grade)
        shuffled = fisher_yates(ids, stream)
        _, n_val, n_test = spec.subset_sizes(len(ids))
        test.extend(shuffled[:n_test])
        val.extend(shuffled[n_test:n_test + n_val])
        train.extend(shuffled[n_test + n_val:])
    return SplitAssignment(tuple(train), tuple(val), tuple(test))


def referable_counts(assignment: SplitAssignment, manifest: CohortManifest) -> Mapping[str, tuple[int, int]]:
    """``{subset: (referable, non_referable)}`` for train, val and test."""
    out = {}
    for name in SUBSETS:
        referable = non_referable = 0
        for image_id in assignment.subset(name):
            if image_id not in manifest:
                raise UnknownId(image_id)
            if to_referable(manifest.grade_of(image_id)) is ReferableLabel.REFERABLE:
                referable += 1
            else:
                non_referable += 1
        out[name] = (referable, non_referable)
    return out
