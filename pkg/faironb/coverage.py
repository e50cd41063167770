#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Pure-group open-ball coverage.

For every instance the largest open ball around it that holds no instance of
another group is computed; then, group by group, the ball covering the most
still-uncovered instances of its own group is picked until the whole group
is covered. Any member of the group can be a centre, covered or not. The selected balls and their radius, covered count and density
drive the Fair-ONB elimination rule.
"""

from concurrent.futures import ThreadPoolExecutor
import logging

import numpy as np
import pandas as pd

from faironb.models import Ball, BallAttributes, Coverage

log = logging.getLogger(__name__)

# Upper bound on the (rows x cols x features) block materialised at once
_CHUNK_ELEMENTS = 4_000_000


def pairwise_distances(a, b):
    """
    Euclidean distances between the rows of ``a`` and the rows of ``b``.

    Every pair is computed with the same arithmetic whatever the chunking,
    so d(x, y) is bit-identical wherever it is evaluated (and symmetric).

    Args:
        a (np.ndarray): (n, d)
        b (np.ndarray): (m, d)

    Returns:
        np.ndarray: (n, m) distances
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.empty((a.shape[0], b.shape[0]))
    if out.size == 0:
        return out
    step = max(1, _CHUNK_ELEMENTS // max(1, b.shape[0] * max(1, a.shape[1])))
    for start in range(0, a.shape[0], step):
        diff = a[start:start + step, None, :] - b[None, :, :]
        out[start:start + step] = np.sqrt((diff * diff).sum(axis=-1))
    return out


def _pure_radii(own, enemies):
    """Largest pure open-ball radius for every row of ``own``"""
    if enemies.shape[0] == 0:
        # No enemy anywhere: a ball reaching past the farthest own point
        return pairwise_distances(own, own).max(axis=1) + 1.0
    radii = np.empty(own.shape[0])
    step = max(1, _CHUNK_ELEMENTS // max(1, enemies.shape[0] * max(1, own.shape[1])))
    for start in range(0, own.shape[0], step):
        radii[start:start + step] = pairwise_distances(own[start:start + step], enemies).min(axis=1)
    return radii


def max_pure_radius(center, ds, group_of):
    """
    Radius of the biggest open ball around ``center`` holding no enemy.

    Args:
        center (int): row id of the centre
        ds (Dataset): dataset
        group_of (np.ndarray): group id per dataset position

    Returns:
        float: distance to the nearest row of another group, or the distance
        to the farthest own-group row plus one when no such row exists
    """
    group_of = np.asarray(group_of)
    pos = int(ds.positions_of([center])[0])
    x = ds.instances[pos:pos + 1]
    enemy = group_of != group_of[pos]
    if not enemy.any():
        own = ds.instances[group_of == group_of[pos]]
        return float(pairwise_distances(x, own).max() + 1.0)
    return float(pairwise_distances(x, ds.instances[enemy]).min())


def _density(count, radius):
    if radius > 0:
        return count / radius, False
    return 0.0, True


def _cover_group(ds, group_of, group_id):
    """Greedy ball selection for one group; returns the group's balls in order"""
    members = np.flatnonzero(group_of == group_id)
    # Position order == row id order, which the tie-break relies on
    members = members[np.argsort(ds.row_ids[members], kind='stable')]
    enemies = np.flatnonzero(group_of != group_id)

    own = ds.instances[members]
    radii = _pure_radii(own, ds.instances[enemies])
    inside = pairwise_distances(own, own) < radii[:, None]
    # A ball always covers its centre, including radius 0
    np.fill_diagonal(inside, True)

    candidates = np.arange(len(members))
    uncovered = np.ones(len(members), dtype=bool)
    counts = inside.sum(axis=1).astype(np.int64)
    balls = []
    while uncovered.any():
        # most newly covered, then largest radius, then smallest row id
        best = int(np.lexsort((candidates, -radii, -counts))[0])

        newly = np.flatnonzero(inside[best] & uncovered)
        uncovered[newly] = False
        counts -= inside[:, newly].sum(axis=1)

        radius = float(radii[best])
        assigned = tuple(int(r) for r in ds.row_ids[members[newly]])
        density, degenerate = _density(len(assigned), radius)
        balls.append(Ball(
            center_row=int(ds.row_ids[members[best]]),
            group_id=int(group_id),
            radius=radius,
            assigned_rows=assigned,
            density=density,
            degenerate=degenerate,
        ))

    log.debug(f'Group {group_id}: {len(members)} rows covered by {len(balls)} balls')
    return balls


def build_coverage(ds, group_of, groups, jobs=1):
    """
    Cover every requested group with pure open balls.

    Args:
        ds (Dataset): dataset (normalised features)
        group_of (np.ndarray): group id per dataset position
        groups (iterable): group ids to cover; each must have rows
        jobs (int): worker threads; groups are independent

    Returns:
        Coverage: balls grouped by ascending group id, each group's balls in
        selection order
    """
    group_of = np.asarray(group_of)
    groups = sorted({int(g) for g in groups})
    if not groups:
        raise ValueError('At least one group must be covered')
    present = set(np.unique(group_of).tolist())
    empty = [g for g in groups if g not in present]
    if empty:
        raise ValueError(f'Groups without instances cannot be covered: {empty}')

    if jobs > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_group = list(pool.map(lambda g: _cover_group(ds, group_of, g), groups))
    else:
        per_group = [_cover_group(ds, group_of, g) for g in groups]

    balls = [b for group_balls in per_group for b in group_balls]
    assignment = {}
    for index, ball in enumerate(balls):
        for row in ball.assigned_rows:
            assignment[row] = index

    log.info(f'Coverage built: {len(balls)} balls over {len(groups)} groups')
    return Coverage(balls=tuple(balls), assignment=assignment, group_ids=tuple(groups))


def ball_attributes(coverage):
    """
    Radius, covered count and density of every ball.

    Density is covered_count / radius; radius-0 balls get density 0 and the
    degenerate flag.
    """
    return [
        BallAttributes(
            index=i,
            group_id=b.group_id,
            radius=b.radius,
            covered_count=b.covered_count,
            density=b.density,
            degenerate=b.degenerate,
        )
        for i, b in enumerate(coverage.balls)
    ]


def coverage_frame(coverage):
    """Coverage dump: one row per ball"""
    rows = []
    order_in_group = {}
    for ball in coverage.balls:
        order = order_in_group.get(ball.group_id, 0)
        order_in_group[ball.group_id] = order + 1
        rows.append({
            'group_id': ball.group_id,
            'selection_order': order,
            'center_row': ball.center_row,
            'radius': ball.radius,
            'covered_count': ball.covered_count,
            'density': ball.density,
        })
    return pd.DataFrame(rows, columns=['group_id', 'selection_order', 'center_row',
                                       'radius', 'covered_count', 'density'])
