import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dr_cascade.errors import DuplicateId, InvalidGrade, ParseError
from dr_cascade.grading import (
    APTOS_2019_COUNTS,
    GRADES,
    CohortManifest,
    DeployedClass,
    ImageRecord,
    ReferableLabel,
    dump_manifest,
    load_manifest,
    manifest_from_counts,
    to_deployed,
    to_referable,
)


@pytest.mark.parametrize(
    "grade, expected",
    [(0, ReferableLabel.NON_REFERABLE), (1, ReferableLabel.NON_REFERABLE), (2, ReferableLabel.REFERABLE),
     (3, ReferableLabel.REFERABLE), (4, ReferableLabel.REFERABLE)],
)
def test_to_referable(grade, expected):
    assert to_referable(grade) is expected


@pytest.mark.parametrize(
    "grade, expected",
    [(0, DeployedClass.CLASS01), (1, DeployedClass.CLASS01), (2, DeployedClass.CLASS2),
     (3, DeployedClass.CLASS3), (4, DeployedClass.CLASS4)],
)
def test_to_deployed(grade, expected):
    assert to_deployed(grade) is expected


@pytest.mark.parametrize("bad", [-1, 5, 2.0, "2", True])
def test_invalid_grades_rejected(bad):
    with pytest.raises(ValueError):
        to_referable(bad)


def test_referable_iff_not_class01():
    for g in GRADES:
        assert (to_referable(g) is ReferableLabel.REFERABLE) == (to_deployed(g) is not DeployedClass.CLASS01)


def test_to_deployed_monotone():
    for g in GRADES:
        for h in GRADES:
            if g <= h:
                assert to_deployed(g).value <= to_deployed(h).value


def test_deployed_labels_roundtrip():
    assert [c.label for c in DeployedClass] == ["class01", "class2", "class3", "class4"]
    for c in DeployedClass:
        assert DeployedClass.from_label(c.label) is c


class TestLoadManifest:
    def test_two_rows(self):
        m = load_manifest("image_id,grade\na,0\nb,4\n")
        assert m.ids == ["a", "b"]
        assert m.counts == {0: 1, 1: 0, 2: 0, 3: 0, 4: 1}

    def test_crlf_and_stream(self):
        m = load_manifest(io.StringIO("image_id,grade\r\nx,2\r\ny,3\r\n"))
        assert [(r.image_id, r.grade) for r in m.records] == [("x", 2), ("y", 3)]

    def test_invalid_grade_reports_line(self):
        with pytest.raises(InvalidGrade) as exc:
            load_manifest("image_id,grade\na,5\n")
        assert exc.value.line == 2

    def test_duplicate(self):
        with pytest.raises(DuplicateId):
            load_manifest("image_id,grade\na,0\nb,1\na,2\n")

    @pytest.mark.parametrize(
        "text, line",
        [("id,grade\na,1\n", 1), ("image_id,grade\na,1\nb\n", 3), ("image_id,grade\na,x\n", 2), ("", 1)],
    )
    def test_malformed(self, text, line):
        with pytest.raises(ParseError) as exc:
            load_manifest(text)
        assert exc.value.line == line

    def test_aptos_total(self, aptos_manifest):
        assert tuple(aptos_manifest.counts[g] for g in GRADES) == APTOS_2019_COUNTS
        assert len(aptos_manifest) == 3662

    def test_manifest_rejects_duplicate_records(self):
        with pytest.raises(DuplicateId):
            CohortManifest((ImageRecord("a", 0), ImageRecord("a", 1)))


ids = st.text(alphabet=st.characters(whitelist_categories=("L", "N"), whitelist_characters="_-."), min_size=1, max_size=12)


@given(st.dictionaries(ids, st.integers(0, 4), max_size=40))
def test_roundtrip(table):
    m = CohortManifest(tuple(ImageRecord(k, v) for k, v in table.items()))
    again = load_manifest(dump_manifest(m))
    assert again.records == m.records
    assert load_manifest(dump_manifest(again)).records == m.records


def test_manifest_from_counts():
    m = manifest_from_counts((2, 0, 1, 0, 0), prefix="p")
    assert m.ids == ["p_0_00000", "p_0_00001", "p_2_00000"]
