"""Tests for the fairness and performance metrics."""

from fractions import Fraction
import math

import numpy as np
import pytest

from faironb import metrics
from faironb.errors import UndefinedMetricError
from faironb.metrics import DIFlag, GroupOutcomeCounts, OutcomeCounts

from conftest import random_dataset

TOL = 1e-12


def counts(p0, p1):
    """Counts from (n_total, n_pred_pos, n_actual_pos, n_true_pos, n_false_pos) tuples"""
    return GroupOutcomeCounts(OutcomeCounts(*p0), OutcomeCounts(*p1))


def rates(r0, r1):
    return GroupOutcomeCounts.from_rates(r0, r1)


# (p0 counts, p1 counts) built so every rate is an exact fraction
FIXTURES = [
    ((10, 5, 5, 5, 0), (10, 5, 5, 5, 0)),
    ((10, 8, 8, 8, 0), (10, 4, 4, 4, 0)),
    ((20, 12, 10, 10, 2), (20, 7, 10, 5, 2)),
    ((20, 7, 10, 6, 1), (20, 12, 10, 9, 3)),
    ((8, 3, 4, 3, 0), (12, 6, 4, 2, 4)),
    ((5, 1, 2, 1, 0), (7, 4, 3, 2, 2)),
    ((9, 9, 4, 4, 5), (9, 3, 4, 3, 0)),
    ((6, 2, 3, 2, 0), (6, 2, 3, 1, 1)),
    ((15, 6, 6, 5, 1), (11, 3, 5, 2, 1)),
    ((4, 1, 2, 1, 0), (16, 12, 8, 8, 4)),
]


class TestFixtures:
    """Every metric against exact rational arithmetic"""

    @pytest.mark.parametrize('p0,p1', FIXTURES)
    def test_against_fractions(self, p0, p1):
        c = counts(p0, p1)
        r0, r1 = Fraction(p0[1], p0[0]), Fraction(p1[1], p1[0])
        tpr0, tpr1 = Fraction(p0[3], p0[2]), Fraction(p1[3], p1[2])
        fpr0, fpr1 = Fraction(p0[4], p0[0] - p0[2]), Fraction(p1[4], p1[0] - p1[2])
        di = r0 / r1

        assert abs(metrics.spd(c) - float(r0 - r1)) < TOL
        assert abs(metrics.di(c) - float(di)) < TOL
        assert abs(metrics.adi(metrics.di(c)) - float(min(di, 1 / di))) < TOL
        tpr_diff, fpr_diff = metrics.epd(c)
        assert abs(tpr_diff - float(tpr0 - tpr1)) < TOL
        assert abs(fpr_diff - float(fpr0 - fpr1)) < TOL
        assert abs(metrics.eod(c) - float(tpr0 - tpr1)) < TOL


class TestSpd:

    @pytest.mark.parametrize('r0,r1,expected', [(0.5, 0.5, 0.0), (0.8, 0.4, 0.4), (0.0, 1.0, -1.0)])
    def test_examples(self, r0, r1, expected):
        assert metrics.spd(rates(r0, r1)) == pytest.approx(expected)

    def test_empty_group(self):
        with pytest.raises(UndefinedMetricError):
            metrics.spd(counts((0, 0, 0, 0, 0), (10, 5, 5, 5, 0)))


class TestDi:

    @pytest.mark.parametrize('r0,r1,expected', [(0.5, 0.5, 1.0), (0.4, 0.8, 0.5), (0.8, 0.4, 2.0)])
    def test_examples(self, r0, r1, expected):
        assert metrics.di(rates(r0, r1)) == pytest.approx(expected)

    def test_zero_denominator_is_infinite(self):
        c = rates(0.5, 0.0)
        assert metrics.di(c) == math.inf
        assert metrics.di_flag(c) == DIFlag.INFINITE

    def test_both_zero_is_flagged_one(self):
        c = rates(0.0, 0.0)
        assert metrics.di(c) == 1.0
        assert metrics.di_flag(c) == DIFlag.UNDEFINED

    def test_spd_zero_iff_di_one(self):
        for r0, r1 in [(0.3, 0.3), (0.3, 0.6), (0.9, 0.1)]:
            c = rates(r0, r1)
            assert (metrics.spd(c) == 0) == (metrics.di(c) == 1.0)


class TestAdi:

    @pytest.mark.parametrize('value,expected', [(1.0, 1.0), (2.0, 0.5), (0.8, 0.8), (1.25, 0.8)])
    def test_examples(self, value, expected):
        assert metrics.adi(value) == pytest.approx(expected)

    @pytest.mark.parametrize('value', [math.inf, 0.0, math.nan])
    def test_sentinels(self, value):
        assert metrics.adi(value) == 0.0


class TestEpdEod:

    def test_identical_groups(self):
        c = counts((20, 12, 10, 10, 2), (20, 12, 10, 10, 2))
        assert metrics.epd(c) == (0.0, 0.0)
        assert metrics.eod(c) == 0.0

    def test_tpr_one_half_fpr_equal(self):
        c = counts((20, 12, 10, 10, 2), (20, 7, 10, 5, 2))
        assert metrics.epd(c) == pytest.approx((0.5, 0.0))

    def test_negative_differences(self):
        c = counts((20, 7, 10, 6, 1), (20, 12, 10, 9, 3))
        assert metrics.epd(c) == pytest.approx((-0.3, -0.2))

    @pytest.mark.parametrize('tp0,tp1,expected', [(3, 3, 0.0), (4, 0, 1.0), (3, 2, 0.25)])
    def test_eod_examples(self, tp0, tp1, expected):
        c = counts((8, tp0, 4, tp0, 0), (8, tp1, 4, tp1, 0))
        assert metrics.eod(c) == pytest.approx(expected)

    def test_no_actual_positives(self):
        with pytest.raises(UndefinedMetricError):
            metrics.eod(counts((10, 2, 0, 0, 2), (10, 5, 5, 5, 0)))


class TestAuc:

    def test_perfect_separation(self):
        assert metrics.auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_constant_scores(self):
        assert metrics.auc([0.5] * 6, [1, 0, 1, 0, 1, 0]) == 0.5

    def test_fixture(self):
        assert metrics.auc([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0]) == 0.75

    def test_single_class(self):
        with pytest.raises(UndefinedMetricError):
            metrics.auc([0.1, 0.2], [1, 1])

    def test_negated_scores(self):
        rng = np.random.default_rng(0)
        scores = rng.random(50)
        labels = rng.integers(0, 2, 50)
        assert metrics.auc(-scores, labels) == pytest.approx(1 - metrics.auc(scores, labels))


class TestAccuracy:

    def test_examples(self):
        assert metrics.accuracy([1, 0, 1], [1, 0, 1]) == 1.0
        assert metrics.accuracy([0, 1, 0], [1, 0, 1]) == 0.0
        assert metrics.accuracy([1, 1, 0, 0], [1, 1, 0, 1]) == 0.75

    def test_empty(self):
        with pytest.raises(UndefinedMetricError):
            metrics.accuracy([], [])


class TestTotalDistances:

    def test_best_union_row(self):
        assert metrics.total_di_distance([0.881, 1.016]) == pytest.approx(0.135, abs=1e-3)

    def test_best_intersection_row(self):
        assert metrics.total_di_distance({'race': 0.868, 'sex': 0.999}) == pytest.approx(0.133, abs=2e-3)

    def test_optimum(self):
        assert metrics.total_di_distance([1.0, 1.0]) == 0.0

    def test_sentinel_rejected(self):
        with pytest.raises(UndefinedMetricError):
            metrics.total_di_distance([math.inf, 1.0])

    def test_adi_distance(self):
        assert metrics.total_adi_distance([0.474, 0.758]) == pytest.approx(0.768)


def test_fairness_report_per_protected_feature():
    ds = random_dataset(3, 60)
    report = metrics.fairness_report(ds, ds.labels, ds.labels)
    assert set(report.per_feature) == {'race', 'sex'}
    for name, f in report.per_feature.items():
        c = GroupOutcomeCounts.from_arrays(ds.protected(name), ds.labels, ds.labels)
        assert f.di == pytest.approx(metrics.di(c))
        assert f.eod == 0.0
