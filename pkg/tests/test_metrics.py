import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dr_cascade.errors import (
    DegenerateMarginals,
    EmptyMatrix,
    EmptyOutcomes,
    NoNegatives,
    NoPositives,
    RankOutOfRange,
    WrongDimension,
)
from dr_cascade.metrics import (
    ConfusionMatrix,
    accuracy,
    cloud_call_rate,
    collapse_to_deployed,
    confusion_from_pairs,
    format_kappa,
    format_percent,
    quadratic_weighted_kappa,
    sensitivity,
    specificity,
)


def kappa_oracle(counts):
    """Disagreement ratio over explicit rater pairs: mean w over matched items / mean w over all cross pairs."""
    k = len(counts)
    items = [(i, j) for i in range(k) for j in range(k) for _ in range(int(counts[i][j]))]
    w = lambda a, b: (a - b) ** 2
    observed = sum(w(t, p) for t, p in items) / len(items)
    expected = sum(w(t, p2) for t, _ in items for _, p2 in items) / len(items) ** 2
    return 1 - observed / expected


class TestConfusion:
    def test_pairs(self):
        assert confusion_from_pairs([(0, 0), (1, 0)], 2).to_list() == [[1, 0], [1, 0]]

    def test_empty(self):
        cm = confusion_from_pairs([], 3)
        assert cm.total == 0
        with pytest.raises(EmptyMatrix):
            accuracy(cm)

    def test_out_of_range(self):
        with pytest.raises(RankOutOfRange):
            confusion_from_pairs([(0, 2)], 2)

    def test_tier1_reference_matrix(self):
        pairs = [(1, 1)] * 295 + [(1, 0)] * 3 + [(0, 1)] * 68 + [(0, 0)] * 367
        cm = confusion_from_pairs(pairs, 2)
        assert cm.to_list() == [[367, 68], [3, 295]]

    def test_csv(self):
        cm = ConfusionMatrix([[1, 2], [3, 4]], ("a", "b"))
        assert cm.to_csv() == "true\\pred,a,b\na,1,2\nb,3,4\n"

    def test_square_required(self):
        with pytest.raises(WrongDimension):
            ConfusionMatrix([[1, 2, 3], [4, 5, 6]])


class TestBinaryRates:
    cm = ConfusionMatrix([[367, 68], [3, 295]])

    def test_reference_values(self):
        # counts: 295 of 298 referable found; 367 of 435 non-referable stopped (0.8437 * 435 = 367.0)
        assert sensitivity(self.cm) == pytest.approx(0.98993, abs=1e-5)
        assert specificity(self.cm) == pytest.approx(0.84368, abs=1e-5)
        assert accuracy(self.cm) == pytest.approx(662 / 733)
        assert format_percent(accuracy(self.cm)) == "90.31%"

    @pytest.mark.parametrize("cm, value", [([[0, 0], [5, 0]], 0.0), ([[0, 0], [0, 7]], 1.0)])
    def test_sensitivity_edges(self, cm, value):
        assert sensitivity(ConfusionMatrix(cm)) == value

    @pytest.mark.parametrize("cm, value", [([[0, 1], [0, 0]], 0.0), ([[10, 0], [0, 0]], 1.0)])
    def test_specificity_edges(self, cm, value):
        assert specificity(ConfusionMatrix(cm)) == value

    def test_undefined(self):
        with pytest.raises(NoPositives):
            sensitivity(ConfusionMatrix([[3, 1], [0, 0]]))
        with pytest.raises(NoNegatives):
            specificity(ConfusionMatrix([[0, 0], [1, 1]]))
        with pytest.raises(WrongDimension):
            sensitivity(ConfusionMatrix(np.eye(3)))

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
    def test_match_recount(self, pairs):
        cm = confusion_from_pairs(pairs, 2)
        assert accuracy(cm) == sum(t == p for t, p in pairs) / len(pairs)
        pos = [p for t, p in pairs if t == 1]
        neg = [p for t, p in pairs if t == 0]
        if pos:
            assert sensitivity(cm) == sum(pos) / len(pos)
        if neg:
            assert specificity(cm) == neg.count(0) / len(neg)
        assert 0 <= accuracy(cm) <= 1


class TestKappa:
    def test_diagonal(self):
        assert quadratic_weighted_kappa(ConfusionMatrix(np.diag([5, 1, 0, 3]))) == 1.0

    def test_chance(self):
        assert quadratic_weighted_kappa(ConfusionMatrix([[1, 1], [1, 1]])) == pytest.approx(0.0, abs=1e-15)

    def test_hand_evaluated(self):
        cm = [[2, 1, 0], [0, 2, 1], [0, 0, 3]]
        # by hand: weighted observed 0.5, weighted expected 3.0
        assert kappa_oracle(cm) == pytest.approx(1 - 0.5 / 3.0, abs=1e-12)
        assert quadratic_weighted_kappa(ConfusionMatrix(cm)) == pytest.approx(0.8333, abs=1e-4)

    def test_degenerate(self):
        with pytest.raises(DegenerateMarginals):
            quadratic_weighted_kappa(ConfusionMatrix([[0, 0], [0, 9]]))

    def test_matches_reference_implementation(self):
        # the explicit-loop kappa common in DR grading code, written out with label lists
        rng = np.random.default_rng(1)
        for _ in range(20):
            k = int(rng.integers(2, 6))
            a = rng.integers(0, k, 40)
            b = np.clip(a + rng.integers(-1, 2, 40), 0, k - 1)
            w = np.zeros((k, k))
            e = np.zeros((k, k))
            o = np.zeros((k, k))
            for i in range(k):
                for j in range(k):
                    w[i, j] = ((i - j) / (k - 1)) ** 2
                    e[i, j] = list(a).count(i) * list(b).count(j) / len(b)
                    o[i, j] = sum(1 for x, y in zip(a, b) if x == i and y == j)
            if (w * e).sum() == 0:
                continue
            ref = 1 - (w * o).sum() / (w * e).sum()
            cm = confusion_from_pairs(zip(a.tolist(), b.tolist()), k)
            assert quadratic_weighted_kappa(cm) == pytest.approx(ref, abs=1e-12)

    def test_symmetric_transpose(self):
        cm = np.array([[4, 1, 0], [1, 3, 2], [0, 2, 5]])
        assert quadratic_weighted_kappa(ConfusionMatrix(cm)) == quadratic_weighted_kappa(ConfusionMatrix(cm.T))


class TestCollapse:
    def test_identity(self):
        out = collapse_to_deployed(ConfusionMatrix(np.eye(5, dtype=int)))
        assert out.to_list() == np.diag([2, 1, 1, 1]).tolist()
        assert out.labels == ("class01", "class2", "class3", "class4")

    def test_zero_one_confusion_becomes_correct(self):
        cm = np.zeros((5, 5), dtype=int)
        cm[0, 1] = 7
        out = collapse_to_deployed(ConfusionMatrix(cm)).counts
        assert out[0, 0] == 7 and out.sum() == 7

    def test_wrong_dimension(self):
        with pytest.raises(WrongDimension):
            collapse_to_deployed(ConfusionMatrix(np.eye(4)))

    def test_reference_pair(self):
        # 583 correct of 733 plus 9 images confused between grades 0 and 1
        cm = np.zeros((5, 5), dtype=int)
        np.fill_diagonal(cm, [300, 50, 170, 25, 38])
        cm[0, 1], cm[1, 0] = 5, 4
        cm[2, 3] = 733 - cm.sum()
        assert cm.sum() == 733 and np.trace(cm) == 583
        assert format_percent(accuracy(ConfusionMatrix(cm))) == "79.54%"
        assert format_percent(accuracy(collapse_to_deployed(ConfusionMatrix(cm)))) == "80.76%"


class _O:
    def __init__(self, forwarded):
        self.forwarded = forwarded


class TestCloudCallRate:
    def test_reference(self):
        r = cloud_call_rate([_O(True)] * 363 + [_O(False)] * 370)
        assert format_percent(r.x, already_percent=True) == "49.52%"
        assert format_percent(r.y, already_percent=True) == "50.48%"
        assert r.y == 100.0 - r.x

    def test_extremes(self):
        none = cloud_call_rate([_O(False)] * 4)
        assert (none.x, none.y) == (0.0, 100.0)
        everything = cloud_call_rate([_O(True)] * 4)
        assert (everything.x, everything.y) == (100.0, 0.0)

    def test_empty(self):
        with pytest.raises(EmptyOutcomes):
            cloud_call_rate([])

    @given(st.integers(1, 5000), st.data())
    def test_sum_is_exactly_100(self, n, data):
        f = data.draw(st.integers(0, n))
        r = cloud_call_rate([_O(True)] * f + [_O(False)] * (n - f))
        assert r.y == 100.0 - r.x
        assert r.x == 100.0 * f / n


def test_formatting():
    assert format_percent(0.98993) == "98.99%"
    assert format_percent(0.5) == "50.00%"
    assert format_percent(0.000049999) == "0.00%"
    assert format_percent(0.00005) == "0.01%"
    assert format_kappa(0.81665) == "0.8167"
