#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Experiment harness.

Runs:
- the Fair-ONB percentile grid over k-fold cross validation
- the FAWOS configuration grid over the same folds
- best-configuration selection and the summary tables built from it

Sampling only ever touches training splits; every configuration is evaluated
on the untouched test split of its fold. A configuration that fails on a
fold is recorded as failed and the run carries on.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
import logging
import math

import numpy as np
import pandas as pd

from faironb import classifier, fawos, groups, metrics
from faironb.config import DEFAULT_LEVELS
from faironb.coverage import ball_attributes, build_coverage
from faironb.errors import FairOnbError, UndefinedMetricError
from faironb.models import (
    AssessmentSource, FAWOS_FACTORS, FAWOS_WEIGHT_ROWS, FawosConfig, NumericScaler,
    Strategy, ThresholdConfig,
)
from faironb.undersampling import assessment_outcomes, undersample

log = logging.getLogger(__name__)

BASELINE_ID = 'baseline'


@dataclass(frozen=True, eq=False)
class FoldRecord:
    fold: int
    fairness: dict = field(default_factory=dict)
    auc: float = math.nan
    accuracy: float = math.nan
    removed: int = 0
    added: int = 0
    resolved: object = None
    failed: bool = False
    error: str = None


@dataclass(eq=False)
class ExperimentReport:
    """Per-fold records and fold means of one configuration"""
    config_id: str
    method: str
    config: object = None
    folds: list = field(default_factory=list)

    @property
    def failed(self):
        return not self.folds or any(f.failed for f in self.folds)

    @property
    def strategy(self):
        if isinstance(self.config, ThresholdConfig):
            return self.config.strategy.value
        return None

    @property
    def features(self):
        for record in self.folds:
            if record.fairness:
                return tuple(record.fairness)
        return ()

    def _ok_folds(self):
        return [f for f in self.folds if not f.failed]

    def mean(self, metric, feature=None):
        """Arithmetic mean over successful folds of a fold or feature metric"""
        folds = self._ok_folds()
        if not folds:
            return math.nan
        if feature is None:
            values = [getattr(f, metric) for f in folds]
        else:
            values = [getattr(f.fairness[feature], metric) for f in folds]
        return float(np.mean(values))

    def mean_resolved(self, attribute):
        values = [getattr(f.resolved, attribute) for f in self._ok_folds() if f.resolved is not None]
        return float(np.mean(values)) if values else math.nan

    def di_flagged(self, feature=None):
        names = [feature] if feature else self.features
        return any(f.fairness[n].di_flag != metrics.DIFlag.OK
                   for f in self._ok_folds() for n in names)

    @property
    def total_di_distance(self):
        """Sum over features of |mean DI - 1|; NaN when any fold's DI is a sentinel"""
        if self.failed or self.di_flagged():
            return math.nan
        values = [self.mean('di', n) for n in self.features]
        if not all(math.isfinite(v) for v in values):
            return math.nan
        return metrics.total_di_distance(values)

    @property
    def total_adi_distance(self):
        if self.failed:
            return math.nan
        return metrics.total_adi_distance([self.mean('adi', n) for n in self.features])


@dataclass(frozen=True, eq=False)
class BestSelection:
    best_global: str
    best_per_feature: dict
    best_performance: str
    performance: str = 'auc'


@dataclass(frozen=True, eq=False)
class FoldContext:
    fold: int
    train: object
    test: object
    table: object
    assessment: object
    coverage: object = None


def prepare_fold(ds, plan, fold, seed=30, assessment_source=AssessmentSource.DATASET,
                 with_coverage=True, jobs=1):
    """
    Split one fold, re-normalise on the training split and build its coverage.

    The scaler is fitted on the training rows only; test rows are mapped
    with it and clamped to [0, 1].
    """
    train, test = plan.split(ds, fold)
    scaler = NumericScaler.fit(train.raw_instances(), ds.schema.numeric_indices)
    train, test = train.rescaled(scaler), test.rescaled(scaler)

    table = groups.enumerate_groups(ds.schema)
    outcomes = assessment_outcomes(train, assessment_source, seed=seed)
    assessment = groups.assess_bias(train, outcomes, source=assessment_source)

    coverage = None
    if with_coverage:
        ids = groups.group_of(train, table)
        coverage = build_coverage(train, ids, np.unique(ids), jobs=jobs)
    return FoldContext(fold=fold, train=train, test=test, table=table,
                       assessment=assessment, coverage=coverage)


def evaluate(train, test, seed=30):
    """
    Fit a tree on ``train`` and measure it on ``test``.

    Returns:
        tuple: (FairnessReport, auc, accuracy); AUC is NaN on a single-class
        test split
    """
    tree = classifier.fit(train, seed=seed)
    preds = classifier.predict(tree, test)
    report = metrics.fairness_report(test, test.labels, preds)
    try:
        auc = metrics.auc(classifier.score(tree, test), test.labels)
    except UndefinedMetricError:
        auc = math.nan
    return report, auc, metrics.accuracy(preds, test.labels)


def _record(ctx, train, seed, removed=0, added=0, resolved=None):
    report, auc, acc = evaluate(train, ctx.test, seed=seed)
    return FoldRecord(fold=ctx.fold, fairness=dict(report.per_feature), auc=auc, accuracy=acc,
                      removed=removed, added=added, resolved=resolved)


def _failed(fold, config_id, exc):
    log.error(f'Config {config_id} failed on fold {fold}: {exc}')
    return FoldRecord(fold=fold, failed=True, error=str(exc))


def _failed_fold(fold, config_ids, exc):
    """One failed record per config when the fold itself cannot be prepared"""
    log.error(f'Fold {fold} could not be prepared, {len(config_ids)} configs marked failed: {exc}')
    return [(cid, FoldRecord(fold=fold, failed=True, error=str(exc))) for cid in config_ids]


def _collect(results, configs):
    reports = {cid: ExperimentReport(config_id=cid, method=method, config=cfg)
               for cid, method, cfg in configs}
    for cid, record in results:
        reports[cid].folds.append(record)
    for report in reports.values():
        report.folds.sort(key=lambda r: r.fold)
    return [reports[cid] for cid in sorted(reports)]


def _log_tally(kind, reports):
    failed = sum(1 for r in reports if r.failed)
    log.info(f'{kind} completed: {len(reports) - failed} successful, {failed} failed')


def _map(fn, items, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def grid_configs(levels=DEFAULT_LEVELS, strategies=(Strategy.UNION, Strategy.INTERSECTION),
                 n_protected=2):
    """Cross product of percentile levels for every strategy"""
    strategies = [Strategy(s) for s in strategies]
    if n_protected == 1:
        # Only one favoured group can exist: union and intersection coincide
        strategies = strategies[:1]
    return [ThresholdConfig(r, n, d, s)
            for s in strategies for r, n, d in product(levels, repeat=3)]


def run_grid(ds, folds, levels=DEFAULT_LEVELS, strategies=(Strategy.UNION, Strategy.INTERSECTION),
             seed=30, assessment_source=AssessmentSource.DATASET, jobs=1):
    """
    Fair-ONB percentile grid over cross-validation folds.

    For every fold the coverage is built once on the training split and
    reused by all configurations; configurations that remove the same rows
    share one trained tree.

    Args:
        ds (Dataset): full dataset
        folds (FoldPlan): fold assignment
        levels (iterable): percentile levels for each attribute
        strategies (iterable): union and/or intersection
        seed (int): decision-tree seed
        assessment_source (AssessmentSource | str): bias detection source
        jobs (int): worker threads per fold

    Returns:
        list: ExperimentReport sorted by config id, baseline included
    """
    configs = grid_configs(levels, strategies, n_protected=len(ds.schema.protected_features))
    log.info(f'Starting Fair-ONB grid: {len(configs)} configs x {folds.k} folds')

    config_ids = [BASELINE_ID] + [c.config_id for c in configs]
    results = []
    for fold in range(folds.k):
        try:
            ctx = prepare_fold(ds, folds, fold, seed=seed, assessment_source=assessment_source,
                               jobs=jobs)
        except Exception as e:
            results.extend(_failed_fold(fold, config_ids, e))
            continue
        try:
            results.append((BASELINE_ID, _record(ctx, ctx.train, seed)))
        except Exception as e:
            results.append((BASELINE_ID, _failed(fold, BASELINE_ID, e)))

        targets = {s: groups.select_target_groups(ctx.table, ctx.assessment, s)
                   for s in {c.strategy for c in configs} | {Strategy.UNION}}
        cache = {}

        def run_one(cfg):
            try:
                result = undersample(ctx.train, ctx.coverage, targets[cfg.strategy], cfg,
                                     pool=targets[Strategy.UNION])
                key = result.removed_rows
                if key not in cache:
                    train = ctx.train.select_rows(result.kept_rows) if key else ctx.train
                    cache[key] = _record(ctx, train, seed)
                base = cache[key]
                return cfg.config_id, FoldRecord(
                    fold=fold, fairness=base.fairness, auc=base.auc, accuracy=base.accuracy,
                    removed=len(result.removed_rows), resolved=result.resolved,
                )
            except Exception as e:
                return cfg.config_id, _failed(fold, cfg.config_id, e)

        results.extend(_map(run_one, configs, jobs))
        log.debug(f'Fold {fold}: {len(cache)} distinct training sets evaluated')

    reports = _collect(results, [(BASELINE_ID, 'baseline', None)] +
                       [(c.config_id, 'fair_onb', c) for c in configs])
    _log_tally('Fair-ONB grid', reports)
    return reports


def fold_ball_attributes(ds, folds, fold, seed=30):
    """Ball attributes of one fold's training coverage"""
    ctx = prepare_fold(ds, folds, fold, seed=seed)
    return ball_attributes(ctx.coverage)


def fawos_configs(weight_rows=FAWOS_WEIGHT_ROWS, factors=FAWOS_FACTORS):
    return [FawosConfig(weights=w, oversampling_factor=f) for w in weight_rows for f in factors]


def run_fawos_grid(ds, folds, cfgs=None, seed=30, assessment_source=AssessmentSource.DATASET, jobs=1):
    """
    FAWOS configurations over the same folds as the Fair-ONB grid.

    Target groups are the positive-class groups carrying a disfavoured
    protected value in the fold's training split.

    Returns:
        list: ExperimentReport sorted by config id, baseline included
    """
    cfgs = list(cfgs) if cfgs is not None else fawos_configs()
    log.info(f'Starting FAWOS grid: {len(cfgs)} configs x {folds.k} folds')

    config_ids = [BASELINE_ID] + [c.config_id for c in cfgs]
    results = []
    for fold in range(folds.k):
        try:
            ctx = prepare_fold(ds, folds, fold, seed=seed, assessment_source=assessment_source,
                               with_coverage=False)
        except Exception as e:
            results.extend(_failed_fold(fold, config_ids, e))
            continue
        try:
            results.append((BASELINE_ID, _record(ctx, ctx.train, seed)))
        except Exception as e:
            results.append((BASELINE_ID, _failed(fold, BASELINE_ID, e)))

        targets = groups.select_disadvantaged_groups(ctx.table, ctx.assessment)

        def run_one(cfg):
            try:
                outcome = fawos.run_oversample(ctx.train, targets, cfg, seed, table=ctx.table)
                return cfg.config_id, _record(ctx, outcome.dataset, seed,
                                              added=sum(outcome.added.values()))
            except Exception as e:
                return cfg.config_id, _failed(fold, cfg.config_id, e)

        results.extend(_map(run_one, cfgs, jobs))

    reports = _collect(results, [(BASELINE_ID, 'baseline', None)] +
                       [(c.config_id, 'fawos', c) for c in cfgs])
    _log_tally('FAWOS grid', reports)
    return reports


def _usable(reports):
    return [r for r in reports if not r.failed and math.isfinite(r.total_di_distance)]


def select_best(reports, performance='auc'):
    """
    Best configurations by total DI distance, per-feature DI and performance.

    Ties are broken by the better performance metric, then by config id.

    Args:
        reports (list): ExperimentReport
        performance (str): 'auc' or 'accuracy'

    Returns:
        BestSelection

    Raises:
        FairOnbError: no successful report with finite DI
    """
    usable = _usable(reports)
    if not usable:
        raise FairOnbError('No successful configuration to select from')

    def perf(r):
        value = r.mean(performance)
        return value if math.isfinite(value) else -math.inf

    best_global = min(usable, key=lambda r: (r.total_di_distance, -perf(r), r.config_id))
    best_per_feature = {
        name: min(usable, key=lambda r: (abs(r.mean('di', name) - 1.0), -perf(r), r.config_id)).config_id
        for name in usable[0].features
    }
    best_perf = min(usable, key=lambda r: (-perf(r), r.total_di_distance, r.config_id))
    return BestSelection(
        best_global=best_global.config_id,
        best_per_feature=best_per_feature,
        best_performance=best_perf.config_id,
        performance=performance,
    )


def _by_strategy(reports):
    buckets = {}
    for r in reports:
        if r.method == 'fair_onb':
            buckets.setdefault(r.strategy, []).append(r)
    return buckets


def best_flags(reports, performance='auc'):
    """config id -> list of 'best' labels earned within its strategy"""
    flags = {}
    for strategy, bucket in sorted(_by_strategy(reports).items()):
        if not _usable(bucket):
            continue
        sel = select_best(bucket, performance)
        flags.setdefault(sel.best_global, []).append('global')
        for name, cid in sel.best_per_feature.items():
            flags.setdefault(cid, []).append(name)
        flags.setdefault(sel.best_performance, []).append(performance)
    return flags


def best_table(reports, performance='auc'):
    """
    Baseline vs. best configurations, one block per strategy.

    Rows: Baseline, Best Global <Strategy> DI, Best <feature> <Strategy> DI
    for each feature, Best <Strategy> <PERF>; columns: per-feature mean DI
    and the performance metric.
    """
    by_id = {r.config_id: r for r in reports}
    baseline = by_id.get(BASELINE_ID)
    features = next((r.features for r in reports if r.features), ())
    label = performance.upper() if performance == 'auc' else performance.capitalize()

    def row(name, report):
        out = {'row': name, 'config_id': report.config_id}
        for f in features:
            out[f'{f} DI'] = report.mean('di', f)
        out[label] = report.mean(performance)
        out['total_di_distance'] = report.total_di_distance
        return out

    rows = []
    if baseline is not None:
        rows.append(row('Baseline', baseline))
    for strategy, bucket in sorted(_by_strategy(reports).items()):
        if not _usable(bucket):
            continue
        sel = select_best(bucket, performance)
        title = strategy.capitalize()
        rows.append(row(f'Best Global {title} DI', by_id[sel.best_global]))
        for f in features:
            rows.append(row(f'Best {f} {title} DI', by_id[sel.best_per_feature[f]]))
        rows.append(row(f'Best {title} {label}', by_id[sel.best_performance]))
    return pd.DataFrame(rows)


def _parameters(report):
    cfg = report.config
    if isinstance(cfg, FawosConfig):
        s, b, r = cfg.weights
        return f'S={s:g}, B={b:g}, R={r:g}, OF={cfg.oversampling_factor:g}'
    if isinstance(cfg, ThresholdConfig):
        return (f'N_i={report.mean_resolved("count_thr"):.4g}, '
                f'R={report.mean_resolved("radius_thr"):.4g}, '
                f'D={report.mean_resolved("density_thr"):.4g} '
                f'(pct {cfg.pct_count}/{cfg.pct_radius}/{cfg.pct_density})')
    return '-'


def comparison_table(onb_reports, fawos_reports):
    """
    Best FAWOS and best Fair-ONB (per strategy) by total ADI distance.

    Ties are broken by higher accuracy. Columns: Method, Best Parameters,
    per-feature mean ADI, Tot. Dist. Opti. (sum of 1 - ADI) and Accuracy.
    """
    def best(candidates):
        usable = [r for r in candidates if not r.failed and math.isfinite(r.total_adi_distance)]
        if not usable:
            return None
        return min(usable, key=lambda r: (r.total_adi_distance, -r.mean('accuracy'), r.config_id))

    entries = [('FAWOS', best([r for r in fawos_reports if r.method == 'fawos']))]
    for strategy, bucket in sorted(_by_strategy(onb_reports).items()):
        entries.append((f'Fair-ONB {strategy.capitalize()}', best(bucket)))

    rows = []
    for method, report in entries:
        if report is None:
            log.warning(f'No successful configuration for {method}')
            continue
        out = {'Method': method, 'Best Parameters': _parameters(report), 'config_id': report.config_id}
        for f in report.features:
            out[f'{f} ADI'] = report.mean('adi', f)
        out['Tot. Dist. Opti.'] = report.total_adi_distance
        out['Accuracy'] = report.mean('accuracy')
        rows.append(out)
    return pd.DataFrame(rows)
