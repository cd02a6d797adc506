import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dr_cascade.errors import CapabilityMissing, DuplicateId, MissingTier2Score, NonFiniteScore, ParseError, UnknownId
from dr_cascade.grading import GRADES, manifest_from_counts
from dr_cascade.scores import (
    ScoreProvider,
    ScoreRecord,
    load_score_file,
    round_clip_grade,
    severity_grade,
    sigmoid,
    synthetic_provider,
    triage_score,
)

TAU = 0.6977


class TestSigmoid:
    def test_midpoint(self):
        assert sigmoid(0.0) == 0.5

    @given(st.floats(-700, 700))
    def test_symmetry(self, z):
        assert sigmoid(z) == pytest.approx(1 - sigmoid(-z), abs=1e-15)

    def test_inverse_at_threshold(self):
        # oracle: logit(0.6977) = ln(0.6977 / 0.3023) = 0.83637
        assert math.log(TAU / (1 - TAU)) == pytest.approx(0.8364, abs=1e-4)
        assert sigmoid(0.8364) == pytest.approx(TAU, abs=1e-4)

    def test_no_overflow(self):
        assert sigmoid(-1000.0) == 0.0
        assert sigmoid(1000.0) == 1.0

    def test_non_finite(self):
        with pytest.raises(NonFiniteScore):
            sigmoid(float("nan"))


class TestRoundClip:
    @pytest.mark.parametrize(
        "score, grade",
        [(1.4, 1), (4.7, 4), (-0.3, 0), (2.5, 3), (4.5, 4), (0.5, 1), (1.5, 2), (-0.5, 0), (-7.0, 0), (9.9, 4), (3.2, 3), (0.4, 0)],
    )
    def test_values(self, score, grade):
        assert round_clip_grade(score) == grade

    @given(st.sampled_from(GRADES), st.floats(-0.4999999, 0.4999999))
    def test_neighbourhood(self, g, delta):
        assert round_clip_grade(g + delta) == g

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_non_finite(self, bad):
        with pytest.raises(NonFiniteScore):
            round_clip_grade(bad)


@pytest.fixture
def provider():
    return ScoreProvider(
        [
            ScoreRecord("zero", 0.0, 3.2),
            ScoreRecord("high", 20.0, 0.4),
            ScoreRecord("edge", 1.0, 4.5),
            ScoreRecord("ungraded", -2.0, None),
        ]
    )


class TestProvider:
    def test_triage(self, provider):
        assert triage_score(provider, "zero") == 0.5
        assert triage_score(provider, "high") > 0.999

    def test_severity(self, provider):
        assert severity_grade(provider, "zero") == 3
        assert severity_grade(provider, "high") == 0
        assert severity_grade(provider, "edge") == 4

    def test_missing_tier2(self, provider):
        with pytest.raises(MissingTier2Score):
            severity_grade(provider, "ungraded")

    def test_unknown(self, provider):
        with pytest.raises(UnknownId):
            triage_score(provider, "nope")
        with pytest.raises(UnknownId):
            severity_grade(provider, "nope")

    def test_capabilities_fail_loudly(self):
        recs = [ScoreRecord("a", 1.0, 2.0)]
        with pytest.raises(CapabilityMissing):
            triage_score(ScoreProvider(recs, has_tier1=False), "a")
        with pytest.raises(CapabilityMissing):
            severity_grade(ScoreProvider(recs, has_tier2=False), "a")
        assert not ScoreProvider([ScoreRecord("a", 1.0)]).has_tier2

    def test_record_validation(self):
        with pytest.raises(NonFiniteScore):
            ScoreRecord("a", float("inf"))
        with pytest.raises(NonFiniteScore):
            ScoreRecord("a", 0.0, float("nan"))

    def test_duplicate_records(self):
        with pytest.raises(DuplicateId):
            ScoreProvider([ScoreRecord("a", 0.0), ScoreRecord("a", 1.0)])


class TestScoreFile:
    def test_two_lines(self):
        p = load_score_file('{"image_id": "a", "tier1_logit": 1.5, "tier2_score": 2.2}\n'
                            '{"image_id": "b", "tier1_logit": -1, "tier2_score": null}\n')
        assert len(p) == 2 and p.has_tier1 and p.has_tier2
        assert severity_grade(p, "a") == 2
        with pytest.raises(MissingTier2Score):
            severity_grade(p, "b")

    def test_duplicate(self):
        with pytest.raises(DuplicateId) as exc:
            load_score_file('{"image_id": "a", "tier1_logit": 1}\n{"image_id": "a", "tier1_logit": 2}\n')
        assert exc.value.line == 2

    @pytest.mark.parametrize(
        "line",
        ['{"image_id": "a"}', "not json", "[1, 2]", '{"image_id": "", "tier1_logit": 0}',
         '{"image_id": "a", "tier1_logit": "x"}', '{"image_id": "a", "tier1_logit": 1, "tier2_score": "2"}'],
    )
    def test_parse_errors(self, line):
        with pytest.raises(ParseError) as exc:
            load_score_file('{"image_id": "ok", "tier1_logit": 0}\n' + line + "\n")
        assert exc.value.line == 2

    def test_roundtrip(self, provider):
        again = load_score_file(provider.dump_jsonl())
        assert list(again) == list(provider)


class TestSynthetic:
    def test_noiseless_values(self):
        m = manifest_from_counts((1, 0, 1, 0, 1), prefix="s")
        p = synthetic_provider(m, 0.0)
        assert p.tier1_logit("s_0_00000") == -3.0
        assert triage_score(p, "s_0_00000") == pytest.approx(0.0474, abs=1e-4)
        assert triage_score(p, "s_2_00000") == pytest.approx(0.8176, abs=1e-4)
        assert severity_grade(p, "s_2_00000") == 2
        assert triage_score(p, "s_4_00000") > TAU

    def test_exhaustive_noiseless_table(self):
        m = manifest_from_counts((3, 3, 3, 3, 3))
        p = synthetic_provider(m, 0.0, seed=11)
        by_grade = {}
        for rec in m.records:
            s = triage_score(p, rec.image_id)
            assert (s >= TAU) == (rec.grade >= 2)
            assert severity_grade(p, rec.image_id) == rec.grade
            by_grade.setdefault(rec.grade, set()).add(s)
        means = [max(by_grade[g]) for g in GRADES]
        assert means == sorted(means)

    def test_noise_is_bounded_and_deterministic(self):
        m = manifest_from_counts((50, 50, 50, 50, 50))
        a = synthetic_provider(m, 1.0, seed=3)
        b = synthetic_provider(m, 1.0, seed=3)
        c = synthetic_provider(m, 1.0, seed=4)
        assert list(a) == list(b) and list(a) != list(c)
        base = (-3.0, -1.5, 1.5, 3.0, 4.0)
        for rec in m.records:
            r = a.record(rec.image_id)
            assert abs(r.tier1_logit - base[rec.grade]) <= 1.0
            assert abs(r.tier2_score - rec.grade) <= 0.6

    def test_negative_noise(self):
        with pytest.raises(ValueError):
            synthetic_provider(manifest_from_counts((1, 0, 0, 0, 0)), -1.0)
