"""Label spaces (ICDR grade, referable flag, deployed 4-class) and the cohort manifest."""

from __future__ import annotations

import csv
import enum
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, TextIO

from .errors import DuplicateId, InvalidGrade, ParseError

GRADES = (0, 1, 2, 3, 4)
MANIFEST_HEADER = ("image_id", "grade")


class ReferableLabel(enum.Enum):
    NON_REFERABLE = "non_referable"
    REFERABLE = "referable"

    @property
    def rank(self) -> int:
        return 1 if self is ReferableLabel.REFERABLE else 0


class DeployedClass(enum.IntEnum):
    """The four deployed output classes; the integer value is the ordinal rank."""

    CLASS01 = 0
    CLASS2 = 1
    CLASS3 = 2
    CLASS4 = 3

    @property
    def label(self) -> str:
        return ("class01", "class2", "class3", "class4")[self.value]

    @classmethod
    def from_label(cls, label: str) -> "DeployedClass":
        try:
            return {c.label: c for c in cls}[label]
        except KeyError:
            raise ValueError(f"unknown deployed class {label!r}") from None


DEPLOYED_LABELS = tuple(c.label for c in DeployedClass)


def check_grade(grade: int) -> int:
    # bool is an int subclass; reject it along with floats and strings
    if isinstance(grade, bool) or not isinstance(grade, int) or grade not in GRADES:
        raise ValueError(f"invalid ICDR grade {grade!r}")
    return grade


def to_referable(grade: int) -> ReferableLabel:
    check_grade(grade)
    return ReferableLabel.NON_REFERABLE if grade <= 1 else ReferableLabel.REFERABLE


def to_deployed(grade: int) -> DeployedClass:
    check_grade(grade)
    return DeployedClass(max(grade - 1, 0))


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    grade: int

    def __post_init__(self):
        if not self.image_id:
            raise ValueError("image_id must be non-empty")
        check_grade(self.grade)

    @property
    def referable(self) -> ReferableLabel:
        return to_referable(self.grade)

    @property
    def deployed(self) -> DeployedClass:
        return to_deployed(self.grade)


@dataclass(frozen=True)
class CohortManifest:
    records: tuple[ImageRecord, ...]
    counts: Mapping[int, int] = field(init=False)
    _by_id: Mapping[str, ImageRecord] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        records = tuple(self.records)
        by_id: dict[str, ImageRecord] = {}
        for rec in records:
            if rec.image_id in by_id:
                raise DuplicateId(rec.image_id)
            by_id[rec.image_id] = rec
        tally = Counter(r.grade for r in records)
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "counts", {g: tally.get(g, 0) for g in GRADES})
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, image_id: object) -> bool:
        return image_id in self._by_id

    def __getitem__(self, image_id: str) -> ImageRecord:
        return self._by_id[image_id]

    @property
    def ids(self) -> list[str]:
        return [r.image_id for r in self.records]

    def grade_of(self, image_id: str) -> int:
        return self._by_id[image_id].grade


def load_manifest(source: TextIO | str) -> CohortManifest:
    """Parse a manifest CSV (header ``image_id,grade``) from a stream or string.

    Errors carry the 1-based line number of the offending row.
    """
    text = source if isinstance(source, str) else source.read()
    lines = text.splitlines()
    if not lines or tuple(c.strip() for c in next(csv.reader([lines[0]]))) != MANIFEST_HEADER:
        raise ParseError(1, "expected header 'image_id,grade'")

    records: list[ImageRecord] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        row = next(csv.reader([line]))
        if len(row) != 2:
            raise ParseError(lineno, f"expected 2 columns, got {len(row)}")
        image_id, raw_grade = row[0].strip(), row[1].strip()
        if not image_id:
            raise ParseError(lineno, "empty image_id")
        try:
            grade = int(raw_grade)
        except ValueError:
            raise ParseError(lineno, f"grade {raw_grade!r} is not an integer") from None
        if grade not in GRADES:
            raise InvalidGrade(lineno, f"grade {grade} outside 0..4")
        if image_id in seen:
            raise DuplicateId(image_id, lineno)
        seen.add(image_id)
        records.append(ImageRecord(image_id, grade))
    return CohortManifest(tuple(records))


def dump_manifest(manifest: CohortManifest) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MANIFEST_HEADER)
    for rec in manifest.records:
        writer.writerow((rec.image_id, rec.grade))
    return buf.getvalue()


def manifest_from_counts(counts: Iterable[int], prefix: str = "img") -> CohortManifest:
    """Build a manifest with ``counts[g]`` records of grade ``g`` and ids ``{prefix}_{g}_{i:05d}``."""
    records = [
        ImageRecord(f"{prefix}_{grade}_{i:05d}", grade)
        for grade, n in zip(GRADES, counts)
        for i in range(n)
    ]
    return CohortManifest(tuple(records))


APTOS_2019_COUNTS = (1805, 370, 999, 193, 295)
