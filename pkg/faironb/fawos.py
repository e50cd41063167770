#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
FAWOS baseline: fairness-aware weighted SMOTE oversampling.

Rows are labelled safe / borderline / rare / outlier from how many of their
5 nearest neighbours share their class. Target groups are oversampled with
SMOTE, seeds drawn with probability proportional to their label's weight.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
from sklearn.neighbors import NearestNeighbors

from faironb import groups
from faironb.errors import ValidationError
from faironb.models import NeighborhoodLabel

log = logging.getLogger(__name__)

K_NEIGHBORS = 5
_SPARE_NEIGHBORS = 5

_LABEL_BY_SAME_CLASS = {
    5: NeighborhoodLabel.SAFE,
    4: NeighborhoodLabel.SAFE,
    3: NeighborhoodLabel.BORDERLINE,
    2: NeighborhoodLabel.BORDERLINE,
    1: NeighborhoodLabel.RARE,
    0: NeighborhoodLabel.OUTLIER,
}


def nearest_neighbors(points, row_ids, k):
    """
    Positions of the k nearest other rows of every row.

    Distance ties are broken by the smaller row id. scikit-learn returns a
    few spare neighbours; when ties reach past them, the row is re-queried
    with every point inside its k-th neighbour distance.

    Args:
        points (np.ndarray): (n, d)
        row_ids (np.ndarray): tie-break key per row
        k (int): neighbours per row, at most n - 1

    Returns:
        np.ndarray: (n, k) positions
    """
    points = np.asarray(points, dtype=float)
    row_ids = np.asarray(row_ids)
    n = points.shape[0]
    index = NearestNeighbors(algorithm='kd_tree').fit(points)
    m = min(n, k + 1 + _SPARE_NEIGHBORS)
    dists, found = index.kneighbors(points, n_neighbors=m)

    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        d, j = dists[i], found[i]
        keep = j != i
        d, j = d[keep], j[keep]
        if m < n and d[k - 1] >= dists[i, -1]:
            ball_d, ball_j = index.radius_neighbors(points[i:i + 1], radius=d[k - 1])
            d, j = ball_d[0], ball_j[0]
            keep = j != i
            d, j = d[keep], j[keep]
        order = np.lexsort((row_ids[j], d))
        out[i] = j[order[:k]]
    return out


def label_neighborhoods(ds):
    """
    FAWOS neighbourhood label of every row.

    Returns:
        list: NeighborhoodLabel per dataset position

    Raises:
        ValidationError: fewer than 6 rows
    """
    if ds.n_rows < K_NEIGHBORS + 1:
        raise ValidationError(f'Need at least {K_NEIGHBORS + 1} rows to label neighbourhoods, got {ds.n_rows}')
    neighbors = nearest_neighbors(ds.instances, ds.row_ids, K_NEIGHBORS)
    same = (ds.labels[neighbors] == ds.labels[:, None]).sum(axis=1)
    return [_LABEL_BY_SAME_CLASS[int(s)] for s in same]


def _round_half_up(value):
    return int(math.floor(value + 0.5))


def synthetic_counts(ds, targets, factor, table=None):
    """round(factor * (largest group size - group size)) per target group"""
    table = table or groups.enumerate_groups(ds.schema)
    sizes = np.bincount(groups.group_of(ds, table), minlength=table.n_groups)
    largest = int(sizes.max())
    return {int(g): _round_half_up(factor * (largest - int(sizes[g]))) for g in sorted(targets)}


@dataclass(frozen=True, eq=False)
class FawosOutcome:
    dataset: object
    added: dict
    labels: list
    targets: frozenset
    pairs: tuple = ()
    warnings: tuple = ()

    def to_dict(self):
        return {
            'added': {str(g): n for g, n in self.added.items()},
            'total_added': sum(self.added.values()),
            'targets': sorted(self.targets),
            'labels': {lab.value: sum(1 for x in self.labels if x == lab) for lab in NeighborhoodLabel},
            'warnings': list(self.warnings),
        }


def run_oversample(ds, targets, cfg, seed, table=None):
    """
    Oversample the target groups and report what was added.

    Args:
        ds (Dataset): training data
        targets (iterable): group ids to oversample
        cfg (FawosConfig): label weights and oversampling factor
        seed (int): random seed (seeds, neighbours and gaps)
        table (GroupTable, optional): group numbering

    Returns:
        FawosOutcome
    """
    table = table or groups.enumerate_groups(ds.schema)
    targets = frozenset(int(t) for t in targets)
    labels = label_neighborhoods(ds)
    ids = groups.group_of(ds, table)
    counts = synthetic_counts(ds, targets, cfg.oversampling_factor, table=table)
    weights_by_label = cfg.label_weights
    numeric = list(ds.schema.numeric_indices)
    rng = np.random.default_rng(seed)

    new_rows, new_labels, pairs, added, warnings = [], [], [], {}, []
    for gid in sorted(targets):
        n_new = counts[gid]
        members = np.flatnonzero(ids == gid)
        if n_new == 0:
            added[gid] = 0
            continue
        if len(members) < 2:
            raise ValidationError(f'Group {gid} has {len(members)} rows; SMOTE needs at least 2')

        weights = np.array([weights_by_label[labels[m]] for m in members], dtype=float)
        if weights.sum() == 0:
            message = f'Group {gid}: every seed candidate weighs 0 (all outliers); using uniform seeds'
            log.warning(message)
            warnings.append(message)
            weights = np.ones(len(members))
        seeds = rng.choice(len(members), size=n_new, p=weights / weights.sum())

        points = ds.instances[members]
        k = min(K_NEIGHBORS, len(members) - 1)
        neighbors = nearest_neighbors(points, ds.row_ids[members], k)
        partners = neighbors[seeds, rng.integers(0, k, size=n_new)]
        gaps = rng.random(n_new)

        synth = points[seeds].copy()
        synth[:, numeric] += gaps[:, None] * (points[partners][:, numeric] - points[seeds][:, numeric])
        new_rows.append(synth)
        new_labels.append(ds.labels[members[seeds]])
        pairs.extend(zip(ds.row_ids[members[seeds]].tolist(), ds.row_ids[members[partners]].tolist()))
        added[gid] = n_new
        log.debug(f'Group {gid}: {n_new} synthetic rows')

    if new_rows:
        out = ds.with_appended(np.vstack(new_rows), np.concatenate(new_labels))
    else:
        out = ds
    log.info(f'FAWOS {cfg.config_id}: {ds.n_rows} -> {out.n_rows} rows (targets {sorted(targets)})')
    return FawosOutcome(
        dataset=out, added=added, labels=labels, targets=targets,
        pairs=tuple(pairs), warnings=tuple(warnings),
    )


def oversample(ds, targets, cfg, seed):
    """FAWOS oversampling; returns the enlarged dataset"""
    return run_oversample(ds, targets, cfg, seed).dataset
