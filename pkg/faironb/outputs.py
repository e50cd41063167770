#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tabular and JSON outputs of experiment runs.

report.csv holds one row per (config, fold, protected feature); every other
table can be rebuilt from it with reports_from_frame.
"""

import json
import logging
import math
import os

import numpy as np
import pandas as pd

from faironb import metrics
from faironb.experiments import ExperimentReport, FoldRecord, best_flags, best_table
from faironb.models import FawosConfig, ResolvedThresholds, Strategy, ThresholdConfig

log = logging.getLogger(__name__)

FLOAT_FORMAT = '%.12g'

REPORT_COLUMNS = [
    'config_id', 'strategy', 'pct_radius', 'pct_count', 'pct_density', 'fold', 'feature',
    'di', 'adi', 'spd', 'eod', 'auc', 'accuracy', 'removed', 'added',
    'method', 'epd_tpr', 'epd_fpr', 'di_flag', 'radius_thr', 'count_thr', 'density_thr',
    'w_safe', 'w_borderline', 'w_rare', 'factor', 'failed', 'error',
]


def _config_columns(report):
    cfg = report.config
    out = {'strategy': '', 'pct_radius': np.nan, 'pct_count': np.nan, 'pct_density': np.nan,
           'w_safe': np.nan, 'w_borderline': np.nan, 'w_rare': np.nan, 'factor': np.nan}
    if isinstance(cfg, ThresholdConfig):
        out.update(strategy=cfg.strategy.value, pct_radius=cfg.pct_radius,
                   pct_count=cfg.pct_count, pct_density=cfg.pct_density)
    elif isinstance(cfg, FawosConfig):
        s, b, r = cfg.weights
        out.update(w_safe=s, w_borderline=b, w_rare=r, factor=cfg.oversampling_factor)
    return out


def report_frame(reports):
    """Long per-fold, per-feature table of a list of ExperimentReport"""
    rows = []
    for report in sorted(reports, key=lambda r: r.config_id):
        base = {'config_id': report.config_id, 'method': report.method, **_config_columns(report)}
        for record in report.folds:
            common = {
                **base,
                'fold': record.fold,
                'auc': record.auc,
                'accuracy': record.accuracy,
                'removed': record.removed,
                'added': record.added,
                'radius_thr': record.resolved.radius_thr if record.resolved else np.nan,
                'count_thr': record.resolved.count_thr if record.resolved else np.nan,
                'density_thr': record.resolved.density_thr if record.resolved else np.nan,
                'failed': record.failed,
                'error': record.error or '',
            }
            if not record.fairness:
                rows.append({**common, 'feature': ''})
                continue
            for name, f in record.fairness.items():
                rows.append({
                    **common,
                    'feature': name,
                    'di': f.di, 'adi': f.adi, 'spd': f.spd, 'eod': f.eod,
                    'epd_tpr': f.epd_tpr, 'epd_fpr': f.epd_fpr, 'di_flag': f.di_flag.value,
                })
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def _config_from_row(row):
    if row['method'] == 'fair_onb':
        return ThresholdConfig(int(row['pct_radius']), int(row['pct_count']),
                               int(row['pct_density']), Strategy(row['strategy']))
    if row['method'] == 'fawos':
        return FawosConfig(weights=(row['w_safe'], row['w_borderline'], row['w_rare']),
                           oversampling_factor=row['factor'])
    return None


def _nan_if_missing(value):
    return math.nan if value is None or (isinstance(value, float) and math.isnan(value)) else float(value)


def reports_from_frame(frame):
    """Rebuild ExperimentReport objects from a report.csv table"""
    reports = []
    frame = frame.copy()
    frame['error'] = frame['error'].fillna('').astype(str)
    frame['feature'] = frame['feature'].fillna('').astype(str)
    for config_id, rows in frame.groupby('config_id', sort=True):
        first = rows.iloc[0]
        report = ExperimentReport(config_id=config_id, method=first['method'],
                                  config=_config_from_row(first))
        for fold, fold_rows in rows.groupby('fold', sort=True):
            head = fold_rows.iloc[0]
            fairness = {}
            for _, r in fold_rows.iterrows():
                if not r['feature']:
                    continue
                fairness[r['feature']] = metrics.FeatureFairness(
                    spd=_nan_if_missing(r['spd']), di=_nan_if_missing(r['di']),
                    adi=_nan_if_missing(r['adi']), epd_tpr=_nan_if_missing(r['epd_tpr']),
                    epd_fpr=_nan_if_missing(r['epd_fpr']), eod=_nan_if_missing(r['eod']),
                    di_flag=metrics.DIFlag(r['di_flag']),
                )
            resolved = None
            if not pd.isna(head['radius_thr']):
                resolved = ResolvedThresholds(float(head['radius_thr']), float(head['count_thr']),
                                              float(head['density_thr']))
            failed = str(head['failed']).strip().lower() == 'true'
            report.folds.append(FoldRecord(
                fold=int(fold), fairness=fairness,
                auc=_nan_if_missing(head['auc']), accuracy=_nan_if_missing(head['accuracy']),
                removed=int(head['removed']), added=int(head['added']),
                resolved=resolved, failed=failed, error=head['error'] or None,
            ))
        reports.append(report)
    return reports


def read_report(path):
    return reports_from_frame(pd.read_csv(path))


def summary_frame(reports, performance='auc'):
    """Fold means per configuration with best-selection flags"""
    flags = best_flags(reports, performance)
    rows = []
    for report in sorted(reports, key=lambda r: r.config_id):
        out = {'config_id': report.config_id, 'method': report.method, **_config_columns(report)}
        for name in report.features:
            out[f'{name}_di'] = report.mean('di', name)
            out[f'{name}_adi'] = report.mean('adi', name)
            out[f'{name}_spd'] = report.mean('spd', name)
            out[f'{name}_eod'] = report.mean('eod', name)
        out.update({
            'auc': report.mean('auc'),
            'accuracy': report.mean('accuracy'),
            'removed': report.mean('removed'),
            'added': report.mean('added'),
            'radius_thr': report.mean_resolved('radius_thr'),
            'count_thr': report.mean_resolved('count_thr'),
            'density_thr': report.mean_resolved('density_thr'),
            'total_di_distance': report.total_di_distance,
            'total_adi_distance': report.total_adi_distance,
            'failed': report.failed,
            'best': ';'.join(flags.get(report.config_id, [])),
        })
        rows.append(out)
    return pd.DataFrame(rows)


def plotdata_frame(reports, feature):
    """DI of one feature and AUC against the mean resolved radius threshold"""
    rows = []
    for report in reports:
        if report.method != 'fair_onb' or report.failed:
            continue
        cfg = report.config
        rows.append({
            'strategy': cfg.strategy.value,
            'pct_count': cfg.pct_count,
            'pct_density': cfg.pct_density,
            'pct_radius': cfg.pct_radius,
            'radius_thr': report.mean_resolved('radius_thr'),
            'count_thr': report.mean_resolved('count_thr'),
            'density_thr': report.mean_resolved('density_thr'),
            'di': report.mean('di', feature),
            'auc': report.mean('auc'),
            'config_id': report.config_id,
        })
    frame = pd.DataFrame(rows)
    if frame.empty:
        return frame
    return frame.sort_values(['strategy', 'pct_count', 'pct_density', 'radius_thr', 'config_id'],
                             kind='mergesort').reset_index(drop=True)


def write_frame(frame, path):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    log.info(f'Wrote {len(frame)} rows to {path}')


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    return str(value)


def write_json(data, path):
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=_json_default)
    log.debug(f'Wrote {path}')


def write_run_outputs(reports, out_dir, prefix='', performance='auc'):
    """report.csv, summary.csv, best_table.csv and plotdata_<feature>.csv"""
    os.makedirs(out_dir, exist_ok=True)
    write_frame(report_frame(reports), os.path.join(out_dir, f'{prefix}report.csv'))
    write_frame(summary_frame(reports, performance), os.path.join(out_dir, f'{prefix}summary.csv'))
    if any(r.method == 'fair_onb' for r in reports):
        write_frame(best_table(reports, performance), os.path.join(out_dir, f'{prefix}best_table.csv'))
        features = next((r.features for r in reports if r.features), ())
        for name in features:
            write_frame(plotdata_frame(reports, name), os.path.join(out_dir, f'{prefix}plotdata_{name}.csv'))
