"""Tests for group numbering, bias detection and target-group selection."""

import numpy as np
import pytest

from faironb import dataset, groups
from faironb.errors import ConfigurationError, UndefinedMetricError
from faironb.models import BiasAssessment, FeatureBias, Strategy

from conftest import make_schema, random_dataset


def rates_dataset(pos0, n0, pos1, n1):
    """One protected feature ``p`` with the given positives per value"""
    p = np.array([0] * n0 + [1] * n1)
    y = np.array([1] * pos0 + [0] * (n0 - pos0) + [1] * pos1 + [0] * (n1 - pos1))
    raw = np.column_stack([p, np.linspace(0, 1, n0 + n1)])
    return dataset.from_raw(make_schema(('p',), 1), raw, y)


def assessment(**favored):
    return BiasAssessment(per_feature={
        name: FeatureBias(di=1.0 if value is None else (0.8 if value == 1 else 1.25), favored_value=value)
        for name, value in favored.items()
    })


class TestEnumerateGroups:

    def test_table_one_numbering(self, table1_schema):
        table = groups.enumerate_groups(table1_schema)
        assert table.n_groups == 8
        assert table.group_id((0, 0), 0) == 0
        assert table.group_id((1, 0), 1) == 5
        assert table.group_id((1, 1), 1) == 7
        assert table.rows()[5] == (1, 0, 1, 5)

    def test_single_protected_feature(self):
        table = groups.enumerate_groups(make_schema(('race',), 1))
        assert table.n_groups == 4
        assert table.positive_groups == (1, 3)

    def test_no_protected_feature(self):
        with pytest.raises(ConfigurationError):
            groups.enumerate_groups(make_schema((), 1))

    def test_group_of_matches_table(self):
        ds = random_dataset(7, 50)
        table = groups.enumerate_groups(ds.schema)
        ids = groups.group_of(ds, table)
        for pos in range(ds.n_rows):
            values = (int(ds.protected('race')[pos]), int(ds.protected('sex')[pos]))
            assert ids[pos] == table.group_id(values, ds.labels[pos])

    def test_group_proportions(self):
        ds = random_dataset(7, 50)
        frame = groups.group_proportions(ds, groups.enumerate_groups(ds.schema))
        assert frame['count'].sum() == 50
        assert frame['share'].sum() == pytest.approx(1.0)
        assert frame['group'].tolist() == list(range(8))


class TestAssessBias:

    def test_equal_rates(self):
        ds = rates_dataset(5, 10, 5, 10)
        bias = groups.assess_bias(ds, ds.labels).per_feature['p']
        assert bias.di == pytest.approx(1.0)
        assert bias.favored_value is None

    def test_value_zero_favoured(self):
        ds = rates_dataset(8, 10, 4, 10)
        bias = groups.assess_bias(ds, ds.labels).per_feature['p']
        assert bias.di == pytest.approx(2.0)
        assert bias.favored_value == 0

    def test_value_one_favoured(self):
        ds = rates_dataset(4, 10, 8, 10)
        bias = groups.assess_bias(ds, ds.labels).per_feature['p']
        assert bias.di == pytest.approx(0.5)
        assert bias.favored_value == 1

    def test_no_positives_for_value_one_is_infinite(self):
        ds = rates_dataset(3, 10, 0, 10)
        bias = groups.assess_bias(ds, ds.labels).per_feature['p']
        assert bias.infinite
        assert bias.favored_value == 0

    def test_empty_protected_value(self):
        ds = rates_dataset(3, 10, 0, 10).select_rows(range(10))
        with pytest.raises(UndefinedMetricError):
            groups.assess_bias(ds, ds.labels)


class TestSelectTargetGroups:

    def setup_method(self):
        self.table = groups.enumerate_groups(make_schema(('race', 'gender'), 1))
        self.assessment = assessment(race=1, gender=0)

    def test_union(self):
        assert groups.select_target_groups(self.table, self.assessment, Strategy.UNION) == {1, 5, 7}

    def test_intersection(self):
        assert groups.select_target_groups(self.table, self.assessment, 'intersection') == {5}

    def test_intersection_within_union(self):
        for race in (0, 1, None):
            for gender in (0, 1, None):
                a = assessment(race=race, gender=gender)
                union = groups.select_target_groups(self.table, a, Strategy.UNION)
                inter = groups.select_target_groups(self.table, a, Strategy.INTERSECTION)
                assert inter <= union

    def test_no_bias_selects_nothing(self):
        a = assessment(race=None, gender=None)
        assert groups.select_target_groups(self.table, a, Strategy.UNION) == frozenset()

    def test_single_feature_strategies_coincide(self):
        table = groups.enumerate_groups(make_schema(('race',), 1))
        a = assessment(race=1)
        union = groups.select_target_groups(table, a, Strategy.UNION)
        inter = groups.select_target_groups(table, a, Strategy.INTERSECTION)
        assert union == inter == {3}

    def test_disadvantaged_groups(self):
        assert groups.select_disadvantaged_groups(self.table, self.assessment) == {1, 3, 7}
