#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Fair-ONB undersampling.

Balls of the target groups whose radius, covered count or density lies
strictly below a percentile threshold are eliminated together with the
instances assigned to them. Thresholds are percentiles of each attribute
over the balls of the union selection, for both strategies; an intersection
threshold can therefore lie outside the range of the intersection balls' own
values.
"""

from dataclasses import dataclass
import logging

import numpy as np

from faironb import classifier, groups
from faironb.coverage import ball_attributes, build_coverage
from faironb.errors import EmptyCoverageError
from faironb.models import AssessmentSource, ResolvedThresholds, Strategy, UndersampleResult

log = logging.getLogger(__name__)


def percentile_lower(values, pct):
    """Nearest-rank-lower percentile: sorted(values)[floor(pct/100 * (n-1))]"""
    ordered = np.sort(np.asarray(values, dtype=float))
    if ordered.size == 0:
        raise EmptyCoverageError('Percentile of an empty set of balls')
    return float(ordered[(int(pct) * (ordered.size - 1)) // 100])


def resolve_thresholds(attrs, cfg):
    """
    Attribute values at the configured percentile levels.

    The thresholds lie within [min, max] of ``attrs``, which is the pool the
    caller passes: the union balls in a grid run. For the intersection
    strategy they are not bounded by the intersection balls' own values.

    Args:
        attrs (list): BallAttributes of the threshold pool
        cfg (ThresholdConfig): percentile levels

    Returns:
        ResolvedThresholds

    Raises:
        EmptyCoverageError: no balls
    """
    if not attrs:
        raise EmptyCoverageError('No balls in the target groups to compute thresholds on')
    return ResolvedThresholds(
        radius_thr=percentile_lower([a.radius for a in attrs], cfg.pct_radius),
        count_thr=percentile_lower([a.covered_count for a in attrs], cfg.pct_count),
        density_thr=percentile_lower([a.density for a in attrs], cfg.pct_density),
    )


def _noop(ds, targets, warning):
    log.warning(warning)
    return UndersampleResult(
        kept_rows=frozenset(int(r) for r in ds.row_ids),
        removed_rows=frozenset(),
        removed_balls=(),
        per_group_removed={},
        resolved=None,
        targets=frozenset(targets),
        warnings=(warning,),
    )


def undersample(ds, coverage, targets, cfg, pool=None):
    """
    Apply the elimination rule to the target groups' balls.

    A target ball is removed when radius < radius_thr OR covered_count <
    count_thr OR density < density_thr; all its assigned rows go with it.
    Rows of other groups are always kept. Thresholds are percentiles over
    the balls of ``pool`` (the targets themselves by default). With the
    union selection as pool, intersection removals are a subset of the
    union removals at the same levels.

    Args:
        ds (Dataset): the dataset the coverage was built on
        coverage (Coverage): coverage of (at least) the target groups
        targets (iterable): target group ids
        cfg (ThresholdConfig): percentile levels
        pool (iterable, optional): groups whose balls the percentiles are
            taken over; must contain the targets

    Returns:
        UndersampleResult
    """
    targets = frozenset(int(t) for t in targets)
    if not targets:
        return _noop(ds, targets, 'No target groups selected; nothing removed')

    covered = [t for t in sorted(targets) if t in coverage.group_ids]
    if not covered:
        return _noop(ds, targets, f'Target groups {sorted(targets)} have no rows; nothing removed')

    pool = set(covered) if pool is None else {int(g) for g in pool} | set(covered)
    all_attrs = ball_attributes(coverage)
    attrs = [all_attrs[i] for i in coverage.ball_indices_of(covered)]
    pool_attrs = [all_attrs[i] for i in coverage.ball_indices_of(pool)]
    resolved = resolve_thresholds(pool_attrs, cfg)

    removed_balls = [
        a.index for a in attrs
        if a.radius < resolved.radius_thr
        or a.covered_count < resolved.count_thr
        or a.density < resolved.density_thr
    ]

    removed_rows = set()
    per_group = {}
    for index in removed_balls:
        ball = coverage.balls[index]
        removed_rows.update(ball.assigned_rows)
        per_group[ball.group_id] = per_group.get(ball.group_id, 0) + ball.covered_count

    warnings = []
    removed_set = set(removed_balls)
    for gid in covered:
        if all(i in removed_set for i in coverage.ball_indices_of([gid])):
            message = f'Group {gid} is entirely removed by {cfg.config_id}'
            log.warning(message)
            warnings.append(message)

    kept = frozenset(int(r) for r in ds.row_ids if int(r) not in removed_rows)
    log.debug(f'{cfg.config_id}: removed {len(removed_balls)} balls, {len(removed_rows)} rows')
    return UndersampleResult(
        kept_rows=kept,
        removed_rows=frozenset(removed_rows),
        removed_balls=tuple(removed_balls),
        per_group_removed=per_group,
        resolved=resolved,
        targets=targets,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True, eq=False)
class PreprocessOutcome:
    dataset: object
    result: UndersampleResult
    assessment: object
    table: object
    coverage: object


def assessment_outcomes(ds, source, seed=30):
    """
    Outcomes bias is measured on: labels, or a tree's own training predictions.

    The tree is grown to full depth and predicts the rows it was fitted on,
    so model outcomes equal the labels except where identical feature rows
    carry conflicting labels.
    """
    if AssessmentSource(source) == AssessmentSource.MODEL:
        return classifier.predict(classifier.fit(ds, seed=seed), ds)
    return ds.labels


def run_preprocess(ds, cfg, assessment_source=AssessmentSource.DATASET, seed=30,
                   coverage=None, jobs=1):
    """
    Full Fair-ONB pipeline with its bookkeeping.

    assess_bias -> select_target_groups -> build_coverage (all groups) ->
    undersample -> dataset restricted to the kept rows.

    Args:
        ds (Dataset): training data
        cfg (ThresholdConfig): percentile levels and strategy
        assessment_source (AssessmentSource | str): dataset labels or model
        seed (int): decision-tree seed for model-based assessment
        coverage (Coverage, optional): precomputed coverage of ``ds``
        jobs (int): threads for coverage construction

    Returns:
        PreprocessOutcome
    """
    table = groups.enumerate_groups(ds.schema)
    outcomes = assessment_outcomes(ds, assessment_source, seed=seed)
    assessment = groups.assess_bias(ds, outcomes, source=assessment_source)
    targets = groups.select_target_groups(table, assessment, cfg.strategy)
    pool = groups.select_target_groups(table, assessment, Strategy.UNION)

    if coverage is None:
        ids = groups.group_of(ds, table)
        coverage = build_coverage(ds, ids, np.unique(ids), jobs=jobs)

    result = undersample(ds, coverage, targets, cfg, pool=pool)
    reduced = ds.select_rows(result.kept_rows) if result.removed_rows else ds
    log.info(f'Fair-ONB {cfg.config_id}: {ds.n_rows} -> {reduced.n_rows} rows '
             f'(targets {sorted(targets)})')
    return PreprocessOutcome(
        dataset=reduced, result=result, assessment=assessment, table=table, coverage=coverage,
    )


def preprocess(ds, cfg, assessment_source=AssessmentSource.DATASET, seed=30):
    """Fair-ONB preprocessing; returns the reduced dataset"""
    return run_preprocess(ds, cfg, assessment_source=assessment_source, seed=seed).dataset
