#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Command line for fair-onb.

Commands: inspect, coverage, preprocess, fawos, grid, compare, report and
inspect-model. Every command writes its outputs and a runconfig.json echo
of its settings under --out; input files are only ever read.

Exit codes: 0 success, 1 usage, 2 data/schema, 3 runtime.
"""

import logging
import os

import click
from dotenv import load_dotenv
import numpy as np

from faironb import __version__, classifier, configure_logging, dataset, experiments, fawos, groups, outputs
from faironb.config import RunConfig, get_config
from faironb.coverage import build_coverage, coverage_frame
from faironb.errors import FairOnbError
from faironb.models import (
    AssessmentSource, FAWOS_FACTORS, FAWOS_WEIGHT_ROWS, FawosConfig, Strategy, ThresholdConfig,
)
from faironb.undersampling import assessment_outcomes, run_preprocess

log = logging.getLogger(__name__)


def _split(raw, cast, name):
    try:
        return tuple(cast(part.strip()) for part in raw.split(',') if part.strip())
    except ValueError:
        raise click.BadParameter(f'cannot parse {raw!r}', param_hint=name)


def _parse_pct(raw):
    if raw is None:
        return None
    values = _split(raw, int, '--pct')
    if len(values) != 3:
        raise click.BadParameter('expected radius,count,density percentiles, e.g. 5,15,10',
                                 param_hint='--pct')
    return values


def _parse_strategies(values):
    if not values:
        return None
    out = []
    for raw in values:
        out.extend(_split(raw, str, '--strategy'))
    valid = {s.value for s in Strategy}
    bad = [s for s in out if s not in valid]
    if bad:
        raise click.BadParameter(f'unknown strategy {bad[0]!r}', param_hint='--strategy')
    return tuple(dict.fromkeys(out))


def _parse_weights(values):
    if not values:
        return None
    rows = []
    for raw in values:
        row = _split(raw, float, '--fawos-weights')
        if len(row) != 3:
            raise click.BadParameter('expected safe,borderline,rare weights, e.g. 0,0.6,0.4',
                                     param_hint='--fawos-weights')
        rows.append(row)
    return tuple(rows)


def _parse_factors(raw):
    return None if raw is None else _split(raw, float, '--fawos-factor')


def _parse_levels(raw):
    return None if raw is None else _split(raw, int, '--levels')


def data_options(fn):
    options = [
        click.option('--data', required=True, help='Dataset CSV file'),
        click.option('--schema', required=True, help='Schema JSON file'),
        click.option('--out', default='runs', show_default=True, help='Output directory'),
        click.option('--seed', type=int, default=None, help='Random seed [default: 30]'),
        click.option('--assess', type=click.Choice([s.value for s in AssessmentSource]),
                     default=None,
                     help='Bias assessment source: dataset labels, or the full-depth tree\'s '
                          'predictions on its own training rows, which match the labels '
                          'unless identical rows conflict [default: dataset]'),
        click.option('--jobs', type=click.IntRange(min=1), default=None, help='Worker threads'),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def fold_options(fn):
    fn = click.option('--folds', type=click.IntRange(min=2), default=None,
                      help='Cross-validation folds [default: 5]')(fn)
    return fn


def _start(command, **overrides):
    """Build the RunConfig, create the output directory and echo the settings"""
    run = RunConfig.from_config(command, get_config(), **overrides)
    os.makedirs(run.out, exist_ok=True)
    outputs.write_json(run.to_dict(), os.path.join(run.out, 'runconfig.json'))
    log.info(f'{command}: writing outputs to {run.out}')
    return run


def _load(run):
    return dataset.load_csv(run.data, run.schema)


def _folds(run, ds):
    return dataset.stratified_folds(ds, run.folds, run.seed)


@click.group()
@click.version_option(__version__, prog_name='faironb')
def cli():
    """Fair-ONB undersampling and its evaluation harness"""
    configure_logging(get_config())


@cli.command()
@data_options
def inspect(data, schema, out, seed, assess, jobs):
    """Print the group table, group proportions and bias assessment"""
    run = _start('inspect', data=data, schema=schema, out=out, seed=seed, assess=assess, jobs=jobs)
    ds = _load(run)
    table = groups.enumerate_groups(ds.schema)
    proportions = groups.group_proportions(ds, table)
    assessment = groups.assess_bias(ds, assessment_outcomes(ds, run.assess, seed=run.seed),
                                    source=run.assess)

    click.echo(f'{ds.n_rows} rows, {ds.n_features} features, '
               f'protected: {", ".join(ds.schema.protected_features)}')
    click.echo(proportions.to_string(index=False))
    for name, bias in assessment.per_feature.items():
        di = 'inf' if bias.infinite else f'{bias.di:.4f}'
        favored = '-' if bias.favored_value is None else bias.favored_value
        click.echo(f'{name}: DI={di} favoured={favored}')
    for strategy in Strategy:
        targets = groups.select_target_groups(table, assessment, strategy)
        click.echo(f'{strategy.value} targets: {sorted(targets)}')

    outputs.write_frame(proportions, os.path.join(run.out, 'groups.csv'))
    outputs.write_json({
        'rows': ds.n_rows,
        'features': list(ds.schema.feature_names),
        'assessment': assessment.to_dict(),
        'targets': {s.value: sorted(groups.select_target_groups(table, assessment, s))
                    for s in Strategy},
    }, os.path.join(run.out, 'inspect.json'))


@cli.command()
@data_options
def coverage(data, schema, out, seed, assess, jobs):
    """Build the pure-group ball coverage and dump its balls"""
    run = _start('coverage', data=data, schema=schema, out=out, seed=seed, assess=assess, jobs=jobs)
    ds = _load(run)
    table = groups.enumerate_groups(ds.schema)
    ids = groups.group_of(ds, table)
    cov = build_coverage(ds, ids, np.unique(ids), jobs=run.jobs)
    outputs.write_frame(coverage_frame(cov), os.path.join(run.out, 'coverage.csv'))
    click.echo(f'{len(cov.balls)} balls over {len(cov.group_ids)} groups')


@cli.command()
@data_options
@click.option('--pct', required=True, help='Percentiles radius,count,density, e.g. 5,15,10')
@click.option('--strategy', default='union', show_default=True, help='union or intersection')
def preprocess(data, schema, out, seed, assess, jobs, pct, strategy):
    """Fair-ONB undersampling of a whole dataset"""
    levels = _parse_pct(pct)
    strategies = _parse_strategies([strategy])
    if len(strategies) != 1:
        raise click.BadParameter('exactly one strategy', param_hint='--strategy')
    run = _start('preprocess', data=data, schema=schema, out=out, seed=seed, assess=assess,
                 jobs=jobs, pct=levels, strategies=strategies)
    ds = _load(run)
    cfg = ThresholdConfig(*levels, strategy=strategies[0])
    outcome = run_preprocess(ds, cfg, assessment_source=run.assess, seed=run.seed, jobs=run.jobs)

    dataset.write_csv(outcome.dataset, os.path.join(run.out, 'reduced.csv'))
    outputs.write_json({
        'config_id': cfg.config_id,
        'result': outcome.result.to_dict(),
        'assessment': outcome.assessment.to_dict(),
        'proportions_before': groups.group_proportions(ds, outcome.table).to_dict('records'),
        'proportions_after': groups.group_proportions(outcome.dataset, outcome.table).to_dict('records'),
    }, os.path.join(run.out, 'reduced.json'))
    click.echo(f'{cfg.config_id}: {ds.n_rows} -> {outcome.dataset.n_rows} rows')


@cli.command('fawos')
@data_options
@click.option('--fawos-weights', 'weights', default='0,0.6,0.4', show_default=True,
              help='Safe,borderline,rare weights')
@click.option('--fawos-factor', 'factor', default='1.0', show_default=True, help='Oversampling factor')
def fawos_command(data, schema, out, seed, assess, jobs, weights, factor):
    """FAWOS oversampling of a whole dataset"""
    rows = _parse_weights([weights])
    factors = _parse_factors(factor)
    if len(factors) != 1:
        raise click.BadParameter('exactly one factor', param_hint='--fawos-factor')
    run = _start('fawos', data=data, schema=schema, out=out, seed=seed, assess=assess, jobs=jobs,
                 fawos_weights=rows, fawos_factors=factors)
    ds = _load(run)
    cfg = FawosConfig(weights=rows[0], oversampling_factor=factors[0])
    table = groups.enumerate_groups(ds.schema)
    assessment = groups.assess_bias(ds, assessment_outcomes(ds, run.assess, seed=run.seed),
                                    source=run.assess)
    targets = groups.select_disadvantaged_groups(table, assessment)
    outcome = fawos.run_oversample(ds, targets, cfg, run.seed, table=table)

    dataset.write_csv(outcome.dataset, os.path.join(run.out, 'oversampled.csv'))
    outputs.write_json({
        'config_id': cfg.config_id,
        'result': outcome.to_dict(),
        'assessment': assessment.to_dict(),
        'proportions_before': groups.group_proportions(ds, table).to_dict('records'),
        'proportions_after': groups.group_proportions(outcome.dataset, table).to_dict('records'),
    }, os.path.join(run.out, 'oversampled.json'))
    click.echo(f'{cfg.config_id}: {ds.n_rows} -> {outcome.dataset.n_rows} rows')


@cli.command()
@data_options
@fold_options
@click.option('--levels', default=None, help='Percentile levels [default: 0,5,10,15,20]')
@click.option('--strategy', 'strategy', multiple=True, help='union and/or intersection')
def grid(data, schema, out, seed, assess, jobs, folds, levels, strategy):
    """Fair-ONB percentile grid over cross-validation folds"""
    run = _start('grid', data=data, schema=schema, out=out, seed=seed, assess=assess, jobs=jobs,
                 folds=folds, levels=_parse_levels(levels), strategies=_parse_strategies(strategy))
    ds = _load(run)
    reports = experiments.run_grid(ds, _folds(run, ds), levels=run.levels, strategies=run.strategies,
                                   seed=run.seed, assessment_source=run.assess, jobs=run.jobs)
    outputs.write_run_outputs(reports, run.out)
    _echo_best(reports)


def _echo_best(reports, performance='auc'):
    try:
        flags = experiments.best_flags(reports, performance)
    except FairOnbError as e:
        log.warning(f'No best configuration: {e}')
        return
    for config_id, labels in sorted(flags.items()):
        click.echo(f'{config_id}: best {", ".join(labels)}')


@cli.command()
@data_options
@fold_options
@click.option('--levels', default=None, help='Percentile levels [default: 0,5,10,15,20]')
@click.option('--strategy', 'strategy', multiple=True, help='union and/or intersection')
@click.option('--fawos-weights', 'weights', multiple=True,
              help='Safe,borderline,rare weights (repeatable) [default: the four built-in rows]')
@click.option('--fawos-factor', 'factor', default=None, help='Oversampling factors [default: 0.8,1.0,1.2]')
def compare(data, schema, out, seed, assess, jobs, folds, levels, strategy, weights, factor):
    """Fair-ONB grid and FAWOS grid on the same folds, side by side"""
    run = _start('compare', data=data, schema=schema, out=out, seed=seed, assess=assess, jobs=jobs,
                 folds=folds, levels=_parse_levels(levels), strategies=_parse_strategies(strategy),
                 fawos_weights=_parse_weights(weights), fawos_factors=_parse_factors(factor))
    ds = _load(run)
    plan = _folds(run, ds)
    onb = experiments.run_grid(ds, plan, levels=run.levels, strategies=run.strategies,
                               seed=run.seed, assessment_source=run.assess, jobs=run.jobs)
    cfgs = experiments.fawos_configs(run.fawos_weights or FAWOS_WEIGHT_ROWS,
                                     run.fawos_factors or FAWOS_FACTORS)
    fawos_reports = experiments.run_fawos_grid(ds, plan, cfgs, seed=run.seed,
                                               assessment_source=run.assess, jobs=run.jobs)

    outputs.write_run_outputs(onb, run.out, prefix='onb_', performance='accuracy')
    outputs.write_run_outputs(fawos_reports, run.out, prefix='fawos_', performance='accuracy')
    table = experiments.comparison_table(onb, fawos_reports)
    outputs.write_frame(table, os.path.join(run.out, 'comparison.csv'))
    if not table.empty:
        click.echo(table.to_string(index=False))


@cli.command()
@click.option('--out', default='runs', show_default=True, help='Run directory holding report.csv')
@click.option('--report', 'report_path', default=None, help='report.csv to rebuild from')
@click.option('--performance', type=click.Choice(['auc', 'accuracy']), default='auc', show_default=True)
def report(out, report_path, performance):
    """Rebuild summary, best table and plot data from a report.csv"""
    report_path = report_path or os.path.join(out, 'report.csv')
    if not os.path.exists(report_path):
        raise click.BadParameter(f'{report_path} does not exist', param_hint='--report')
    run = _start('report', out=out, extra={'report': report_path, 'performance': performance})
    reports = outputs.read_report(report_path)
    outputs.write_frame(outputs.summary_frame(reports, performance), os.path.join(run.out, 'summary.csv'))
    if any(r.method == 'fair_onb' for r in reports):
        outputs.write_frame(experiments.best_table(reports, performance),
                            os.path.join(run.out, 'best_table.csv'))
        for name in next((r.features for r in reports if r.features), ()):
            outputs.write_frame(outputs.plotdata_frame(reports, name),
                                os.path.join(run.out, f'plotdata_{name}.csv'))
    _echo_best(reports, performance)


@cli.command('inspect-model')
@data_options
def inspect_model(data, schema, out, seed, assess, jobs):
    """Fit the decision tree on the whole dataset and dump it as text"""
    run = _start('inspect-model', data=data, schema=schema, out=out, seed=seed, assess=assess, jobs=jobs)
    ds = _load(run)
    tree = classifier.fit(ds, seed=run.seed)
    text = classifier.dump_tree(tree, list(ds.schema.feature_names))
    with open(os.path.join(run.out, 'tree.txt'), 'w', encoding='utf-8') as fh:
        fh.write(text + '\n')
    click.echo(f'depth {tree.depth}, {tree.n_leaves} leaves')


def main(argv=None):
    """
    Run the command line and return its exit code.

    Args:
        argv (list, optional): arguments without the program name

    Returns:
        int: 0 success, 1 usage, 2 data/schema, 3 runtime
    """
    load_dotenv()
    try:
        result = cli.main(args=argv, prog_name='faironb', standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except click.exceptions.Abort:
        click.echo('Aborted!', err=True)
        return 1
    except FairOnbError as e:
        click.echo(f'Error: {e}', err=True)
        return e.exit_code
    except Exception as e:
        log.exception(f'Unexpected failure: {e}')
        click.echo(f'Error: {e}', err=True)
        return 3
    return result if isinstance(result, int) else 0
