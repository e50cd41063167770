#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Domain records shared by the fair-onb modules.

Datasets, coverages and configurations are immutable once built: arrays are
flagged read-only and the dataclasses are frozen, so the same objects can be
handed to several worker threads during a grid run.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
import json
import os

import numpy as np
from sklearn.preprocessing import MinMaxScaler

from faironb.errors import ConfigurationError, SchemaError


class Strategy(str, Enum):
    """How target groups are combined across protected features"""
    UNION = 'union'
    INTERSECTION = 'intersection'


class AssessmentSource(str, Enum):
    """Where the positive rates used for bias detection come from"""
    DATASET = 'dataset'
    MODEL = 'model'


class FeatureKind(str, Enum):
    BINARY = 'binary'
    NUMERIC = 'numeric'


class NeighborhoodLabel(str, Enum):
    """5NN neighbourhood type used by FAWOS"""
    SAFE = 'safe'
    BORDERLINE = 'borderline'
    RARE = 'rare'
    OUTLIER = 'outlier'


def _frozen(array, dtype):
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Schema:
    """Column roles of a tabular dataset"""
    feature_names: tuple
    feature_kinds: dict
    protected_features: tuple
    class_name: str
    positive_class_value: object = 1
    negative_class_value: object = None

    def __post_init__(self):
        missing = [p for p in self.protected_features if p not in self.feature_names]
        if missing:
            raise SchemaError(f'Protected features not among the features: {missing}')
        for name in self.feature_names:
            if self.feature_kinds.get(name) not in (FeatureKind.BINARY, FeatureKind.NUMERIC):
                raise SchemaError(f'Feature {name!r} has no kind (binary or numeric)')
        for name in self.protected_features:
            if self.feature_kinds[name] != FeatureKind.BINARY:
                raise SchemaError(f'Protected feature {name!r} must be binary')
        if self.class_name in self.feature_names:
            raise SchemaError(f'Class column {self.class_name!r} is also declared as a feature')

    @classmethod
    def from_dict(cls, data, header=None):
        """
        Build a Schema from its JSON description.

        Args:
            data (dict): keys ``class``, ``positive_value``, ``protected``,
                ``binary`` and ``numeric``
            header (list, optional): CSV header; when given, features keep the
                column order of the file

        Returns:
            Schema
        """
        for key in ('class', 'protected'):
            if key not in data:
                raise SchemaError(f'Schema is missing the {key!r} key')

        protected = tuple(data.get('protected') or ())
        binary = list(data.get('binary') or ())
        numeric = list(data.get('numeric') or ())
        # Protected features are binary whether or not they are listed as such
        for name in protected:
            if name not in binary:
                binary.append(name)

        overlap = set(binary) & set(numeric)
        if overlap:
            raise SchemaError(f'Columns declared both binary and numeric: {sorted(overlap)}')

        kinds = {name: FeatureKind.BINARY for name in binary}
        kinds.update({name: FeatureKind.NUMERIC for name in numeric})

        if header is not None:
            names = tuple(name for name in header if name in kinds)
        else:
            names = tuple(binary + numeric)

        return cls(
            feature_names=names,
            feature_kinds=kinds,
            protected_features=protected,
            class_name=data['class'],
            positive_class_value=data.get('positive_value', 1),
            negative_class_value=data.get('negative_value'),
        )

    @classmethod
    def from_json(cls, path, header=None):
        """Read a schema JSON file"""
        if not os.path.exists(path):
            raise SchemaError(f'Schema file not found: {path}')
        try:
            with open(path, encoding='utf-8') as fh:
                data = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f'Schema file {path} is not valid JSON: {e}')
        return cls.from_dict(data, header=header)

    def to_dict(self):
        return {
            'class': self.class_name,
            'positive_value': self.positive_class_value,
            'negative_value': self.negative_class_value,
            'protected': list(self.protected_features),
            'binary': [n for n in self.feature_names if self.feature_kinds[n] == FeatureKind.BINARY],
            'numeric': [n for n in self.feature_names if self.feature_kinds[n] == FeatureKind.NUMERIC],
        }

    def index(self, name):
        return self.feature_names.index(name)

    @property
    def numeric_indices(self):
        return tuple(i for i, n in enumerate(self.feature_names)
                     if self.feature_kinds[n] == FeatureKind.NUMERIC)

    @property
    def binary_indices(self):
        return tuple(i for i, n in enumerate(self.feature_names)
                     if self.feature_kinds[n] == FeatureKind.BINARY)

    @property
    def protected_indices(self):
        return tuple(self.index(n) for n in self.protected_features)

    def with_negative_value(self, value):
        return Schema(
            feature_names=self.feature_names,
            feature_kinds=self.feature_kinds,
            protected_features=self.protected_features,
            class_name=self.class_name,
            positive_class_value=self.positive_class_value,
            negative_class_value=value,
        )


@dataclass(frozen=True, eq=False)
class NumericScaler:
    """
    Min-max scaling of the numeric columns onto [0, 1].

    Wraps a fitted scikit-learn ``MinMaxScaler(clip=True)``; binary columns
    pass through untouched. Without an estimator the map is the identity.
    """
    columns: tuple
    estimator: object = None

    @classmethod
    def fit(cls, raw, columns):
        raw = np.asarray(raw, dtype=float)
        columns = tuple(columns)
        if raw.shape[0] == 0 or not columns:
            return cls(columns)
        return cls(columns, MinMaxScaler(clip=True).fit(raw[:, list(columns)]))

    def transform(self, raw):
        """Scale numeric columns; values outside the fitted range are clamped"""
        out = np.array(raw, dtype=float, copy=True)
        if self.estimator is not None and len(out):
            cols = list(self.columns)
            out[:, cols] = self.estimator.transform(out[:, cols])
        return out

    def inverse_transform(self, scaled):
        out = np.array(scaled, dtype=float, copy=True)
        if self.estimator is not None and len(out):
            cols = list(self.columns)
            out[:, cols] = self.estimator.inverse_transform(out[:, cols])
        return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """Encoded tabular data: normalised features, binary labels, stable row ids"""
    schema: Schema
    instances: np.ndarray
    labels: np.ndarray
    row_ids: np.ndarray
    scaler: NumericScaler = None

    def __post_init__(self):
        instances = np.asarray(self.instances, dtype=float)
        if instances.ndim != 2:
            instances = instances.reshape(len(self.labels), len(self.schema.feature_names))
        if instances.shape[1] != len(self.schema.feature_names):
            raise SchemaError(
                f'Instance arity {instances.shape[1]} does not match '
                f'{len(self.schema.feature_names)} features'
            )
        if not (instances.shape[0] == len(self.labels) == len(self.row_ids)):
            raise SchemaError('Instances, labels and row ids differ in length')
        if len(np.unique(self.row_ids)) != len(self.row_ids):
            raise SchemaError('Row ids must be unique')
        object.__setattr__(self, 'instances', _frozen(instances, float))
        object.__setattr__(self, 'labels', _frozen(self.labels, np.int8))
        object.__setattr__(self, 'row_ids', _frozen(self.row_ids, np.int64))
        if self.scaler is None:
            # Instances given already normalised: identity scaling
            object.__setattr__(self, 'scaler', NumericScaler(self.schema.numeric_indices))

    def __len__(self):
        return self.instances.shape[0]

    @property
    def n_rows(self):
        return self.instances.shape[0]

    @property
    def n_features(self):
        return self.instances.shape[1]

    @cached_property
    def _positions(self):
        return {int(r): i for i, r in enumerate(self.row_ids)}

    def positions_of(self, row_ids):
        """Positions of the given row ids, in the order given"""
        return np.array([self._positions[int(r)] for r in row_ids], dtype=np.int64)

    def protected(self, name):
        """Protected feature column as 0/1 integers"""
        return self.instances[:, self.schema.index(name)].astype(np.int8)

    def take(self, positions):
        """Subset by positions; row ids, schema and scaler are preserved"""
        positions = np.asarray(positions, dtype=np.int64)
        return Dataset(
            schema=self.schema,
            instances=self.instances[positions],
            labels=self.labels[positions],
            row_ids=self.row_ids[positions],
            scaler=self.scaler,
        )

    def select_rows(self, row_ids):
        """Keep only the given row ids, in this dataset's order"""
        keep = np.isin(self.row_ids, np.fromiter(row_ids, dtype=np.int64))
        return self.take(np.flatnonzero(keep))

    def without_rows(self, row_ids):
        drop = np.isin(self.row_ids, np.fromiter(row_ids, dtype=np.int64))
        return self.take(np.flatnonzero(~drop))

    def raw_instances(self):
        """Feature matrix in original units"""
        return self.scaler.inverse_transform(self.instances)

    def rescaled(self, scaler):
        """Re-normalise numeric columns with another scaler (clamping to [0, 1])"""
        return Dataset(
            schema=self.schema,
            instances=scaler.transform(self.raw_instances()),
            labels=self.labels,
            row_ids=self.row_ids,
            scaler=scaler,
        )

    def with_appended(self, instances, labels):
        """Append rows (already in this dataset's normalised space) with fresh ids"""
        instances = np.asarray(instances, dtype=float).reshape(-1, self.n_features)
        labels = np.asarray(labels, dtype=np.int8)
        start = int(self.row_ids.max()) + 1 if self.n_rows else 0
        new_ids = np.arange(start, start + len(labels), dtype=np.int64)
        return Dataset(
            schema=self.schema,
            instances=np.vstack([self.instances, instances]),
            labels=np.concatenate([self.labels, labels]),
            row_ids=np.concatenate([self.row_ids, new_ids]),
            scaler=self.scaler,
        )


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Fold index per dataset position"""
    k: int
    assignments: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'assignments', _frozen(self.assignments, np.int64))

    def test_positions(self, fold):
        return np.flatnonzero(self.assignments == fold)

    def train_positions(self, fold):
        return np.flatnonzero(self.assignments != fold)

    def split(self, ds, fold):
        """(train, test) datasets for one fold"""
        return ds.take(self.train_positions(fold)), ds.take(self.test_positions(fold))


@dataclass(frozen=True)
class Ball:
    """A pure-group open ball selected into a coverage"""
    center_row: int
    group_id: int
    radius: float
    assigned_rows: tuple
    density: float
    degenerate: bool = False

    @property
    def covered_count(self):
        return len(self.assigned_rows)


@dataclass(frozen=True)
class BallAttributes:
    index: int
    group_id: int
    radius: float
    covered_count: int
    density: float
    degenerate: bool


@dataclass(frozen=True, eq=False)
class Coverage:
    """Balls in selection order plus the row to ball assignment"""
    balls: tuple
    assignment: dict
    group_ids: tuple

    def ball_indices_of(self, groups):
        groups = set(groups)
        return [i for i, b in enumerate(self.balls) if b.group_id in groups]


@dataclass(frozen=True, eq=False)
class GroupTable:
    """(protected values, class) combinations and their group ids"""
    protected_order: tuple
    entries: dict

    @cached_property
    def signatures(self):
        return {gid: key for key, gid in self.entries.items()}

    def group_id(self, values, class_value):
        return self.entries[(tuple(int(v) for v in values), int(class_value))]

    def signature(self, group_id):
        """(protected values tuple, class value) of a group"""
        return self.signatures[group_id]

    @property
    def n_groups(self):
        return len(self.entries)

    @property
    def positive_groups(self):
        return tuple(sorted(g for (_, c), g in self.entries.items() if c == 1))

    def rows(self):
        """Table rows (values..., class, group) ordered by group id"""
        return [(*self.signature(g)[0], self.signature(g)[1], g) for g in sorted(self.signatures)]


@dataclass(frozen=True)
class FeatureBias:
    di: float
    favored_value: object
    infinite: bool = False
    undefined: bool = False


@dataclass(frozen=True, eq=False)
class BiasAssessment:
    per_feature: dict
    source: AssessmentSource = AssessmentSource.DATASET

    @property
    def biased_features(self):
        return tuple(f for f, b in self.per_feature.items() if b.favored_value is not None)

    def to_dict(self):
        return {
            'source': self.source.value,
            'features': {
                f: {'di': None if b.infinite else b.di, 'favored_value': b.favored_value,
                    'infinite': b.infinite, 'undefined': b.undefined}
                for f, b in self.per_feature.items()
            },
        }


@dataclass(frozen=True)
class ThresholdConfig:
    """One grid point: percentile levels for radius, covered count and density"""
    pct_radius: int
    pct_count: int
    pct_density: int
    strategy: Strategy = Strategy.UNION

    def __post_init__(self):
        for name in ('pct_radius', 'pct_count', 'pct_density'):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or not 0 <= value <= 100:
                raise ConfigurationError(f'{name} must be an integer percentile in [0, 100], got {value!r}')
        try:
            object.__setattr__(self, 'strategy', Strategy(self.strategy))
        except ValueError:
            raise ConfigurationError(f'Unknown strategy {self.strategy!r}')

    @property
    def config_id(self):
        return (f'{self.strategy.value}_r{self.pct_radius:03d}'
                f'_n{self.pct_count:03d}_d{self.pct_density:03d}')


@dataclass(frozen=True)
class ResolvedThresholds:
    radius_thr: float
    count_thr: float
    density_thr: float


@dataclass(frozen=True, eq=False)
class UndersampleResult:
    kept_rows: frozenset
    removed_rows: frozenset
    removed_balls: tuple
    per_group_removed: dict
    resolved: ResolvedThresholds
    targets: frozenset = frozenset()
    warnings: tuple = ()

    def to_dict(self):
        return {
            'kept': len(self.kept_rows),
            'removed': len(self.removed_rows),
            'removed_rows': sorted(int(r) for r in self.removed_rows),
            'removed_balls': list(self.removed_balls),
            'per_group_removed': {str(g): n for g, n in sorted(self.per_group_removed.items())},
            'targets': sorted(self.targets),
            'resolved': None if self.resolved is None else {
                'radius': self.resolved.radius_thr,
                'count': self.resolved.count_thr,
                'density': self.resolved.density_thr,
            },
            'warnings': list(self.warnings),
        }


# (safe, borderline, rare) weights; outliers always weigh 0
FAWOS_WEIGHT_ROWS = (
    (0.0, 0.4, 0.6),
    (0.0, 0.5, 0.5),
    (0.0, 0.6, 0.4),
    (0.33, 0.33, 0.33),
)
FAWOS_FACTORS = (0.8, 1.0, 1.2)


@dataclass(frozen=True)
class FawosConfig:
    weights: tuple = FAWOS_WEIGHT_ROWS[0]
    oversampling_factor: float = 1.0

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        if len(weights) != 3 or any(w < 0 for w in weights):
            raise ConfigurationError(f'FAWOS weights must be three non-negative numbers, got {self.weights!r}')
        if self.oversampling_factor < 0:
            raise ConfigurationError(f'Oversampling factor must be >= 0, got {self.oversampling_factor}')
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'oversampling_factor', float(self.oversampling_factor))

    @property
    def label_weights(self):
        safe, borderline, rare = self.weights
        return {
            NeighborhoodLabel.SAFE: safe,
            NeighborhoodLabel.BORDERLINE: borderline,
            NeighborhoodLabel.RARE: rare,
            NeighborhoodLabel.OUTLIER: 0.0,
        }

    @property
    def config_id(self):
        s, b, r = self.weights
        return f'fawos_s{s:g}_b{b:g}_r{r:g}_of{self.oversampling_factor:g}'
