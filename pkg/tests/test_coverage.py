"""Tests for pure-group ball coverage: radii, greedy selection, attributes."""

import numpy as np
import pytest

from faironb.coverage import (
    ball_attributes, build_coverage, coverage_frame, max_pure_radius, pairwise_distances,
)
from faironb.models import Dataset

from conftest import line_dataset, make_schema


def random_points(seed, max_rows=300, max_features=8, max_groups=8):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, max_rows + 1))
    d = int(rng.integers(1, max_features + 1))
    g = int(rng.integers(2, max_groups + 1))
    schema = make_schema(protected=(), n_numeric=d)
    ds = Dataset(schema=schema, instances=rng.random((n, d)).round(2),
                 labels=np.zeros(n, dtype=int), row_ids=np.arange(n))
    group_of = rng.integers(0, g, size=n)
    return ds, group_of


def brute_force_cover(ds, group_of):
    """Direct greedy over every group: (center, radius, sorted assigned rows) per ball"""
    dist = pairwise_distances(ds.instances, ds.instances)
    sequence = []
    for gid in sorted(set(group_of.tolist())):
        members = [i for i in range(ds.n_rows) if group_of[i] == gid]
        enemies = [i for i in range(ds.n_rows) if group_of[i] != gid]
        radius = {}
        for m in members:
            if enemies:
                radius[m] = min(dist[m, e] for e in enemies)
            else:
                radius[m] = max(dist[m, o] for o in members) + 1.0
        inside = {m: {o for o in members if o == m or dist[m, o] < radius[m]} for m in members}
        uncovered = set(members)
        while uncovered:
            best = max(members, key=lambda c: (len(inside[c] & uncovered), radius[c], -c))
            newly = inside[best] & uncovered
            uncovered -= newly
            sequence.append((best, radius[best], sorted(newly)))
    return sequence


class TestMaxPureRadius:

    def test_nearest_enemy_distance(self):
        ds = line_dataset([0.0, 0.2, 0.5])
        assert max_pure_radius(1, ds, np.array([0, 0, 1])) == pytest.approx(0.3)

    def test_coincident_enemy_gives_zero(self):
        ds = line_dataset([0.0, 0.4, 0.4])
        assert max_pure_radius(1, ds, np.array([0, 0, 1])) == 0.0

    def test_no_enemy_reaches_past_every_own_point(self):
        ds = line_dataset([0.0, 0.3, 0.9])
        radius = max_pure_radius(0, ds, np.array([0, 0, 0]))
        assert radius == pytest.approx(1.9)
        assert radius > 0.9


class TestBuildCoverage:

    def test_one_ball_covers_group_a(self):
        ds = line_dataset([0.0, 0.1, 0.2, 1.0])
        cov = build_coverage(ds, np.array([0, 0, 0, 1]), {0, 1})
        first = cov.balls[0]
        assert first.group_id == 0
        assert first.center_row == 0
        assert first.radius == pytest.approx(1.0)
        assert first.covered_count == 3
        assert [b.group_id for b in cov.balls] == [0, 1]
        attrs = ball_attributes(cov)
        assert attrs[0].density == pytest.approx(3.0)

    def test_coincident_points_of_two_groups(self):
        ds = line_dataset([0.0, 0.0])
        cov = build_coverage(ds, np.array([0, 1]), [0, 1])
        assert len(cov.balls) == 2
        for ball, row in zip(cov.balls, (0, 1)):
            assert ball.radius == 0.0
            assert ball.assigned_rows == (row,)
            assert ball.density == 0.0
            assert ball.degenerate

    def test_density_convention(self):
        ds = line_dataset([0.0, 0.1, 0.2, 0.3, 0.45, 0.5, 0.55, 0.6, 0.7, 0.8, 2.0])
        group_of = np.array([0] * 10 + [1])
        cov = build_coverage(ds, group_of, [0, 1])
        for ball in cov.balls:
            if ball.radius > 0:
                assert ball.density == pytest.approx(ball.covered_count / ball.radius)

    def test_covered_instance_can_centre_a_later_ball(self):
        # group 0 at 0.1 0.2 0.3 0.42, enemies at 0.0 and 0.47
        ds = line_dataset([0.1, 0.2, 0.3, 0.42, 0.0, 0.47])
        cov = build_coverage(ds, np.array([0, 0, 0, 0, 1, 1]), [0, 1])
        first, second = cov.balls[0], cov.balls[1]
        assert first.center_row == 1
        assert first.assigned_rows == (0, 1, 2)
        assert second.group_id == 0
        assert second.center_row == 2
        assert second.radius == pytest.approx(0.17)
        assert second.assigned_rows == (3,)

    def test_absent_group_is_rejected(self):
        ds = line_dataset([0.0, 1.0])
        with pytest.raises(ValueError):
            build_coverage(ds, np.array([0, 1]), [0, 1, 2])

    @pytest.mark.parametrize('seed', range(50))
    def test_purity_and_completeness(self, seed):
        ds, group_of = random_points(seed)
        cov = build_coverage(ds, group_of, np.unique(group_of))
        dist = pairwise_distances(ds.instances, ds.instances)

        for ball in cov.balls:
            center = int(ds.positions_of([ball.center_row])[0])
            inside = np.flatnonzero(dist[center] < ball.radius)
            assert set(group_of[inside].tolist()) <= {ball.group_id}
            for row in ball.assigned_rows:
                assert group_of[row] == ball.group_id
                assert row == ball.center_row or dist[center, row] < ball.radius

        assigned = [r for b in cov.balls for r in b.assigned_rows]
        assert sorted(assigned) == ds.row_ids.tolist()
        assert set(cov.assignment) == set(ds.row_ids.tolist())
        for row, index in cov.assignment.items():
            assert row in cov.balls[index].assigned_rows

    @pytest.mark.parametrize('seed', range(20))
    def test_matches_brute_force_greedy(self, seed):
        ds, group_of = random_points(1000 + seed, max_rows=100)
        cov = build_coverage(ds, group_of, np.unique(group_of))
        got = [(b.center_row, b.radius, sorted(b.assigned_rows)) for b in cov.balls]
        assert got == brute_force_cover(ds, group_of)

    @pytest.mark.parametrize('seed', range(40))
    def test_two_groups_match_brute_force_greedy(self, seed):
        rng = np.random.default_rng(2000 + seed)
        n = int(rng.integers(20, 81))
        ds = Dataset(schema=make_schema(protected=(), n_numeric=2),
                     instances=rng.random((n, 2)).round(2),
                     labels=np.zeros(n, dtype=int), row_ids=np.arange(n))
        group_of = rng.integers(0, 2, size=n)
        cov = build_coverage(ds, group_of, np.unique(group_of))
        got = [(b.center_row, b.radius, sorted(b.assigned_rows)) for b in cov.balls]
        assert got == brute_force_cover(ds, group_of)

    @pytest.mark.parametrize('seed', range(5))
    def test_threads_give_same_coverage(self, seed):
        ds, group_of = random_points(seed, max_rows=120)
        serial = build_coverage(ds, group_of, np.unique(group_of))
        threaded = build_coverage(ds, group_of, np.unique(group_of), jobs=4)
        assert serial.balls == threaded.balls

    def test_coverage_frame(self):
        ds = line_dataset([0.0, 0.1, 0.2, 1.0])
        frame = coverage_frame(build_coverage(ds, np.array([0, 0, 0, 1]), [0, 1]))
        assert frame['covered_count'].tolist() == [3, 1]
        assert frame['selection_order'].tolist() == [0, 0]


def test_distances_are_symmetric():
    rng = np.random.default_rng(0)
    points = rng.random((40, 5))
    dist = pairwise_distances(points, points)
    np.testing.assert_array_equal(dist, dist.T)
    assert np.all(np.diag(dist) == 0.0)
