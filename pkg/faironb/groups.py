#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Groups formed by protected-feature values and class, bias detection and
target-group selection.
"""

from itertools import product
import logging

import numpy as np
import pandas as pd

from faironb import metrics
from faironb.errors import ConfigurationError, UndefinedMetricError
from faironb.models import AssessmentSource, BiasAssessment, FeatureBias, GroupTable, Strategy

log = logging.getLogger(__name__)


def enumerate_groups(schema):
    """
    Number every (protected values, class) combination.

    Protected features vary in schema order with the class as the fastest
    varying coordinate, so with (race, gender) the combination
    (race=1, gender=0, class=1) is group 5.

    Args:
        schema (Schema): dataset schema

    Returns:
        GroupTable
    """
    protected = tuple(schema.protected_features)
    if not protected:
        raise ConfigurationError('At least one protected feature is required to form groups')

    entries = {}
    for group_id, combo in enumerate(product((0, 1), repeat=len(protected) + 1)):
        entries[(tuple(combo[:-1]), combo[-1])] = group_id
    return GroupTable(protected_order=protected, entries=entries)


def group_of(ds, table, labels=None):
    """
    Group id of every dataset row.

    Args:
        ds (Dataset): dataset
        table (GroupTable): group numbering
        labels (np.ndarray, optional): class values to use instead of ds.labels

    Returns:
        np.ndarray: group id per dataset position
    """
    labels = ds.labels if labels is None else np.asarray(labels)
    ids = labels.astype(np.int64).copy()
    width = len(table.protected_order)
    for i, name in enumerate(table.protected_order):
        ids += ds.protected(name).astype(np.int64) << (width - i)
    return ids


def group_proportions(ds, table):
    """Row count and share of every group (empty groups included)"""
    ids = group_of(ds, table)
    counts = np.bincount(ids, minlength=table.n_groups)
    total = max(1, ds.n_rows)
    rows = []
    for *values, cls, gid in table.rows():
        rows.append({
            **dict(zip(table.protected_order, values)),
            'class': cls,
            'group': gid,
            'count': int(counts[gid]),
            'share': counts[gid] / total,
        })
    return pd.DataFrame(rows)


def assess_bias(ds, labels_or_preds, source=AssessmentSource.DATASET):
    """
    Disparate Impact of every protected feature and its favoured value.

    DI > 1 favours protected value 0, DI < 1 favours value 1, DI = 1 favours
    none. A protected value without positives gives an infinite DI (value 0
    favoured); no positives at all gives an undefined DI reported as 1.

    Args:
        ds (Dataset): dataset whose protected columns are used
        labels_or_preds (np.ndarray): outcomes aligned with ds rows
        source (AssessmentSource): where the outcomes came from

    Returns:
        BiasAssessment

    Raises:
        UndefinedMetricError: a protected value has no rows at all
    """
    outcomes = np.asarray(labels_or_preds)
    if outcomes.shape[0] != ds.n_rows:
        raise ValueError(f'{outcomes.shape[0]} outcomes for {ds.n_rows} rows')

    per_feature = {}
    for name in ds.schema.protected_features:
        counts = metrics.GroupOutcomeCounts.from_arrays(ds.protected(name), outcomes, outcomes)
        for v in (0, 1):
            if counts[v].n_total == 0:
                raise UndefinedMetricError(
                    f'Protected feature {name!r} has no rows with value {v}; DI undefined'
                )
        value = metrics.di(counts)
        flag = metrics.di_flag(counts)
        if flag == metrics.DIFlag.INFINITE:
            favored = 0
        elif flag == metrics.DIFlag.UNDEFINED or value == 1.0:
            favored = None
        else:
            favored = 0 if value > 1.0 else 1
        per_feature[name] = FeatureBias(
            di=value,
            favored_value=favored,
            infinite=flag == metrics.DIFlag.INFINITE,
            undefined=flag == metrics.DIFlag.UNDEFINED,
        )
        log.debug(f'{name}: DI={value:.4f} favoured={favored}')

    return BiasAssessment(per_feature=per_feature, source=AssessmentSource(source))


def _matching_positive_groups(table, assessment, require_all):
    constraints = [
        (table.protected_order.index(f), assessment.per_feature[f].favored_value)
        for f in assessment.biased_features
    ]
    selected = set()
    for gid in table.positive_groups:
        values, _ = table.signature(gid)
        hits = [values[i] == favored for i, favored in constraints]
        if (all(hits) if require_all else any(hits)):
            selected.add(gid)
    return selected


def select_target_groups(table, assessment, strategy):
    """
    Positive-class groups carrying favoured protected values.

    Union keeps the groups matching the favoured value of any biased
    feature, intersection those matching all of them at once. Features
    without bias impose no constraint.

    Args:
        table (GroupTable): group numbering
        assessment (BiasAssessment): favoured values
        strategy (Strategy | str): union or intersection

    Returns:
        frozenset: selected group ids (empty when nothing is biased or the
        intersection is empty; a warning is logged)
    """
    strategy = Strategy(strategy)
    if not assessment.biased_features:
        log.warning('No protected feature shows bias; preprocessing is a no-op')
        return frozenset()

    selected = _matching_positive_groups(
        table, assessment, require_all=strategy == Strategy.INTERSECTION
    )
    if not selected:
        log.warning(f'Empty {strategy.value} group selection; preprocessing is a no-op')
    return frozenset(selected)


def select_disadvantaged_groups(table, assessment):
    """
    Positive-class groups with at least one disfavoured protected value.

    These are the positive groups left out of the intersection selection,
    the groups FAWOS oversamples.
    """
    if not assessment.biased_features:
        return frozenset()
    favored = _matching_positive_groups(table, assessment, require_all=True)
    return frozenset(g for g in table.positive_groups if g not in favored)
