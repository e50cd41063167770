"""Shared dataset builders for the fair-onb tests."""

import numpy as np
import pytest

from faironb import dataset
from faironb.models import Dataset, FeatureKind, Schema


@pytest.fixture(autouse=True)
def testing_env(monkeypatch):
    monkeypatch.setenv('FAIRONB_ENV', 'testing')


def make_schema(protected=('race', 'sex'), n_numeric=2, extra_binary=()):
    numeric = tuple(f'x{i}' for i in range(n_numeric))
    binary = tuple(protected) + tuple(extra_binary)
    kinds = {name: FeatureKind.BINARY for name in binary}
    kinds.update({name: FeatureKind.NUMERIC for name in numeric})
    return Schema(
        feature_names=binary + numeric,
        feature_kinds=kinds,
        protected_features=tuple(protected),
        class_name='y',
    )


def line_dataset(xs, labels=None):
    """1-D dataset of already normalised points, no protected feature"""
    schema = Schema(
        feature_names=('x',),
        feature_kinds={'x': FeatureKind.NUMERIC},
        protected_features=(),
        class_name='y',
    )
    labels = np.zeros(len(xs), dtype=int) if labels is None else np.asarray(labels)
    return Dataset(
        schema=schema,
        instances=np.asarray(xs, dtype=float).reshape(-1, 1),
        labels=labels,
        row_ids=np.arange(len(xs)),
    )


def random_dataset(seed, n, protected=('race', 'sex'), n_numeric=2):
    """Random rows in which every protected value and both classes occur"""
    rng = np.random.default_rng(seed)
    prot = rng.integers(0, 2, size=(n, len(protected)))
    prot[0, :] = 0
    prot[1, :] = 1
    labels = rng.integers(0, 2, size=n)
    labels[0], labels[1] = 0, 1
    raw = np.hstack([prot, rng.random((n, n_numeric))])
    return dataset.from_raw(make_schema(protected, n_numeric), raw, labels)


def boundary_dataset(seed, n, protected=('race', 'sex'), flip=0.05):
    """Two numeric features split by a slanted line, with a share of flipped labels"""
    rng = np.random.default_rng(seed)
    prot = rng.integers(0, 2, size=(n, len(protected)))
    x = rng.random((n, 2))
    labels = (x[:, 0] + 0.5 * x[:, 1] + 0.1 * prot[:, 0] > 0.8).astype(int)
    labels ^= (rng.random(n) < flip).astype(int)
    prot[0, :], prot[1, :] = 0, 1
    labels[0], labels[1] = 0, 1
    raw = np.hstack([prot, x])
    return dataset.from_raw(make_schema(protected, 2), raw, labels)


def biased_dataset(seed=30, n=1500):
    """
    Two Gaussian classes in 2-D plus one binary protected feature ``p``.

    Both values of ``p`` get the same share of positives in the positive
    blob. P=0 gets twice that share again as isolated positives scattered
    through the negative blob on its side facing the positive class, so its
    positive rate is three times that of P=1.
    """
    rng = np.random.default_rng(seed)
    p = rng.integers(0, 2, size=n)
    u = rng.random(n)
    core = u < 0.05
    boundary = (p == 0) & (u >= 0.05) & (u < 0.15)
    y = (core | boundary).astype(int)
    x = rng.normal(0.3, 0.1, size=(n, 2))
    x[core] = rng.normal(0.72, 0.07, size=(int(core.sum()), 2))
    x[boundary] = rng.normal(0.37, 0.06, size=(int(boundary.sum()), 2))
    raw = np.column_stack([p, x])
    return dataset.from_raw(make_schema(('p',), 2), raw, y)


@pytest.fixture
def table1_schema():
    return make_schema(('race', 'gender'), 1)
