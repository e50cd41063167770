#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Dataset ingestion and cross-validation folds.

Supports:
- Loading a CSV file under a JSON schema (binary, numeric, protected, class)
- Min-max normalisation of numeric columns
- Writing a dataset back to CSV in original units
- Stratified k-fold plans
"""

import logging
import math
import os
import warnings

import numpy as np
import pandas as pd
from sklearn.model_selection import StratifiedKFold

from faironb.errors import DataError, InfeasibleFoldsError, ParseError, SchemaError, ValidationError
from faironb.models import Dataset, FeatureKind, FoldPlan, NumericScaler, Schema

log = logging.getLogger(__name__)


def _resolve_schema(schema_config, header):
    if isinstance(schema_config, Schema):
        return Schema.from_dict(schema_config.to_dict(), header=header)
    if isinstance(schema_config, dict):
        return Schema.from_dict(schema_config, header=header)
    return Schema.from_json(os.fspath(schema_config), header=header)


def _same_value(cell, value):
    """Compare a CSV cell with a schema value, numerically when both parse"""
    if str(cell).strip() == str(value).strip():
        return True
    try:
        return float(cell) == float(value)
    except (TypeError, ValueError):
        return False


def _binary_column(frame, name):
    values = pd.to_numeric(frame[name].str.strip(), errors='coerce')
    bad = ~values.isin([0, 1])
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise ValidationError(
            f'Column {name!r} is declared binary but row {row} holds {frame[name].iloc[row]!r} '
            f'(expected 0 or 1)'
        )
    return values.to_numpy(dtype=float)


def _numeric_column(frame, name):
    values = pd.to_numeric(frame[name].str.strip(), errors='coerce')
    bad = values.isna().to_numpy() | ~np.isfinite(values.to_numpy(dtype=float))
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise ParseError(
            f'Column {name!r}: cannot parse {frame[name].iloc[row]!r} as a number at row {row}',
            row=row, column=name,
        )
    return values.to_numpy(dtype=float)


def _class_column(frame, schema):
    raw = frame[schema.class_name].str.strip()
    distinct = list(dict.fromkeys(raw))
    positives = [v for v in distinct if _same_value(v, schema.positive_class_value)]
    negatives = [v for v in distinct if v not in positives]
    if len(positives) > 1 or len(negatives) > 1:
        raise ValidationError(
            f'Class column {schema.class_name!r} must be binary, found values {distinct}'
        )
    labels = raw.isin(positives).to_numpy(dtype=np.int8)
    negative = negatives[0] if negatives else schema.negative_class_value
    return labels, negative


def load_csv(path, schema_config):
    """
    Load a CSV file into a normalised Dataset.

    Args:
        path (str): CSV file with a header row, comma separated, UTF-8
        schema_config (Schema | dict | str): schema object, its JSON
            description, or the path of a schema JSON file

    Returns:
        Dataset: binary columns in {0, 1}, numeric columns min-max scaled to
        [0, 1], class encoded 1 for the positive value; rows keep file order

    Raises:
        SchemaError: missing file or missing columns
        ValidationError: missing values, non-binary binary/protected columns,
            non-binary class
        ParseError: unparseable numeric cell (carries the row index)
    """
    if not os.path.exists(path):
        raise DataError(f'Data file not found: {path}')

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f'Cannot read CSV {path}: {e}')
    frame.columns = [c.strip() for c in frame.columns]

    schema = _resolve_schema(schema_config, header=list(frame.columns))
    declared = [n for n, _ in schema.feature_kinds.items()]
    missing = [n for n in declared + [schema.class_name] if n not in frame.columns]
    if missing:
        raise SchemaError(f'Columns missing from {path}: {missing}')

    used = list(schema.feature_names) + [schema.class_name]
    empty = frame[used].apply(lambda col: col.str.strip() == '')
    if empty.to_numpy().any():
        row, col = np.argwhere(empty.to_numpy())[0]
        raise ValidationError(f'Missing value in column {used[col]!r} at row {row}')

    columns = []
    for name in schema.feature_names:
        if schema.feature_kinds[name] == FeatureKind.BINARY:
            columns.append(_binary_column(frame, name))
        else:
            columns.append(_numeric_column(frame, name))
    raw = np.column_stack(columns) if columns else np.zeros((len(frame), 0))

    for name in schema.protected_features:
        present = set(raw[:, schema.index(name)].astype(int))
        if present != {0, 1}:
            raise ValidationError(
                f'Protected feature {name!r} must take both values 0 and 1, found {sorted(present)}'
            )

    labels, negative = _class_column(frame, schema)
    schema = schema.with_negative_value(negative)

    ds = from_raw(schema, raw, labels)
    log.info(f'Loaded {ds.n_rows} rows x {ds.n_features} features from {path} '
             f'({int(labels.sum())} positive)')
    return ds


def from_raw(schema, raw, labels, row_ids=None):
    """
    Build a Dataset from raw values, fitting the min-max scaler on them.

    Args:
        schema (Schema): column roles
        raw (array-like): rows x features in original units
        labels (array-like): 0/1 labels
        row_ids (array-like, optional): defaults to 0..n-1

    Returns:
        Dataset
    """
    raw = np.asarray(raw, dtype=float).reshape(len(labels), len(schema.feature_names))
    if row_ids is None:
        row_ids = np.arange(len(labels))
    scaler = NumericScaler.fit(raw, schema.numeric_indices)
    return Dataset(
        schema=schema,
        instances=scaler.transform(raw),
        labels=np.asarray(labels),
        row_ids=np.asarray(row_ids),
        scaler=scaler,
    )


def to_frame(ds):
    """Dataset as a DataFrame in original units, class column last"""
    raw = ds.raw_instances()
    frame = pd.DataFrame(raw, columns=list(ds.schema.feature_names))
    for idx in ds.schema.binary_indices:
        name = ds.schema.feature_names[idx]
        frame[name] = frame[name].round().astype(int)
    negative = ds.schema.negative_class_value
    if negative is None:
        negative = 0
    frame[ds.schema.class_name] = np.where(
        ds.labels == 1, ds.schema.positive_class_value, negative
    )
    return frame


def write_csv(ds, path):
    """Write a dataset in original units so that load_csv can read it back"""
    to_frame(ds).to_csv(path, index=False)
    log.debug(f'Wrote {ds.n_rows} rows to {path}')


def stratified_folds(ds, k, seed, strict=True):
    """
    Assign every row to one of k folds, preserving the class ratio.

    scikit-learn's ``StratifiedKFold`` shuffles with the seed, so per-fold
    class counts are the floor or ceiling of the proportional share.

    Args:
        ds (Dataset): dataset to split
        k (int): number of folds, >= 2
        seed (int): shuffling seed
        strict (bool): raise when a class has fewer than k rows; otherwise
            only warn (some folds then hold none of that class)

    Returns:
        FoldPlan
    """
    if k < 2:
        raise InfeasibleFoldsError(f'Need at least 2 folds, got {k}')
    if ds.n_rows < k:
        raise InfeasibleFoldsError(f'Cannot split {ds.n_rows} rows into {k} folds')

    labels = ds.labels.astype(np.int64)
    for cls in (0, 1):
        n_class = int((labels == cls).sum())
        if 0 < n_class < k:
            message = f'Class {cls} has {n_class} rows, fewer than {k} folds'
            if strict:
                raise InfeasibleFoldsError(message)
            log.warning(message)

    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    assignments = np.empty(ds.n_rows, dtype=np.int64)
    with warnings.catch_warnings():
        # the sparse-class case was logged above
        warnings.simplefilter('ignore', UserWarning)
        try:
            for fold, (_, test) in enumerate(splitter.split(np.zeros((ds.n_rows, 1)), labels)):
                assignments[test] = fold
        except ValueError as e:
            raise InfeasibleFoldsError(str(e)) from e

    return FoldPlan(k=k, assignments=assignments)


def fold_class_counts(ds, plan):
    """(k, 2) array of negative/positive counts per fold"""
    counts = np.zeros((plan.k, 2), dtype=np.int64)
    np.add.at(counts, (plan.assignments, ds.labels.astype(np.int64)), 1)
    return counts


def proportional_share(n_class, k):
    """Bounds every fold's count of a class must fall in"""
    return math.floor(n_class / k), math.ceil(n_class / k)
