#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Deterministic CART decision tree (Gini impurity, binary class).

Trees grow until every leaf is pure or no threshold separates its rows,
with no depth limit and a minimum of two rows to split. Among equally good
splits the lowest feature index wins, then the lowest threshold.
"""

from dataclasses import dataclass
import logging

import numpy as np

from faironb.errors import ValidationError
from faironb.models import Dataset

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Leaf:
    n_pos: int
    n_neg: int

    @property
    def score(self):
        return self.n_pos / (self.n_pos + self.n_neg)

    @property
    def label(self):
        return 1 if self.n_pos >= self.n_neg else 0


@dataclass
class Split:
    """Rows with x[feature] <= threshold go left"""
    feature: int
    threshold: float
    left: object = None
    right: object = None


@dataclass(frozen=True, eq=False)
class DecisionTree:
    root: object
    n_features: int
    seed: int = 30

    def predict(self, rows):
        return predict(self, rows)

    def score(self, rows):
        return score(self, rows)

    def to_dict(self):
        return {'n_features': self.n_features, 'root': _node_dict(self.root)}

    @property
    def depth(self):
        best = 0
        stack = [(self.root, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if isinstance(node, Split):
                stack.extend([(node.left, d + 1), (node.right, d + 1)])
        return best

    @property
    def n_leaves(self):
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                count += 1
            else:
                stack.extend([node.left, node.right])
        return count


def _node_dict(node):
    if isinstance(node, Leaf):
        return {'leaf': [node.n_pos, node.n_neg]}
    return {
        'feature': node.feature,
        'threshold': node.threshold,
        'left': _node_dict(node.left),
        'right': _node_dict(node.right),
    }


def _best_split(X, y, idx):
    """
    Lowest weighted-Gini split of the rows ``idx``.

    Minimising n_L*gini_L + n_R*gini_R is the same as maximising
    (p_L^2 + q_L^2)/n_L + (p_R^2 + q_R^2)/n_R, which is what is compared.

    Returns:
        tuple | None: (purity, feature, threshold), None when every feature
        is constant on these rows
    """
    n = len(idx)
    labels = y[idx]
    pos_total = labels.sum()
    left_n = np.arange(1, n, dtype=float)
    right_n = n - left_n
    best = None
    for feature in range(X.shape[1]):
        values = X[idx, feature]
        order = np.argsort(values, kind='stable')
        v = values[order]
        valid = v[1:] > v[:-1]
        if not valid.any():
            continue
        left_pos = np.cumsum(labels[order])[:-1].astype(float)
        right_pos = pos_total - left_pos
        left_neg = left_n - left_pos
        right_neg = right_n - right_pos
        purity = (left_pos ** 2 + left_neg ** 2) / left_n + (right_pos ** 2 + right_neg ** 2) / right_n
        purity[~valid] = -np.inf
        i = int(np.argmax(purity))
        if best is None or purity[i] > best[0]:
            threshold = (v[i] + v[i + 1]) / 2.0
            if threshold >= v[i + 1]:
                threshold = v[i]
            best = (purity[i], feature, float(threshold))
    return best


def _rows_matrix(rows, n_features):
    if isinstance(rows, Dataset):
        rows = rows.instances
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if rows.shape[1] != n_features:
        raise ValidationError(f'Rows have {rows.shape[1]} features, the tree expects {n_features}')
    return rows


def fit(train, seed=30):
    """
    Grow a CART tree on a training dataset.

    Args:
        train (Dataset): training rows (single-class data gives one leaf)
        seed (int): recorded with the tree; split ties are resolved by
            feature index then threshold, so the seed never changes the tree

    Returns:
        DecisionTree

    Raises:
        ValueError: empty training set
    """
    if train.n_rows == 0:
        raise ValueError('Cannot fit a decision tree on an empty training set')

    X = train.instances
    y = train.labels.astype(np.int64)
    root = None
    stack = [(np.arange(train.n_rows), None, None)]
    while stack:
        idx, parent, side = stack.pop()
        n_pos = int(y[idx].sum())
        n_neg = len(idx) - n_pos
        split = None
        if n_pos and n_neg and len(idx) >= 2:
            split = _best_split(X, y, idx)

        if split is None:
            node = Leaf(n_pos=n_pos, n_neg=n_neg)
        else:
            _, feature, threshold = split
            node = Split(feature=feature, threshold=threshold)
            goes_left = X[idx, feature] <= threshold
            stack.append((idx[~goes_left], node, 'right'))
            stack.append((idx[goes_left], node, 'left'))

        if parent is None:
            root = node
        else:
            setattr(parent, side, node)

    tree = DecisionTree(root=root, n_features=train.n_features, seed=seed)
    log.debug(f'Tree fitted on {train.n_rows} rows: depth {tree.depth}, {tree.n_leaves} leaves')
    return tree


def _leaf_counts(tree, rows):
    rows = _rows_matrix(rows, tree.n_features)
    counts = np.zeros((rows.shape[0], 2), dtype=np.int64)
    stack = [(tree.root, np.arange(rows.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if len(idx) == 0:
            continue
        if isinstance(node, Leaf):
            counts[idx] = (node.n_pos, node.n_neg)
            continue
        goes_left = rows[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[goes_left]))
        stack.append((node.right, idx[~goes_left]))
    return counts


def predict(tree, rows):
    """Majority label of the reached leaf (ties predict positive)"""
    counts = _leaf_counts(tree, rows)
    return (counts[:, 0] >= counts[:, 1]).astype(np.int8)


def score(tree, rows):
    """Positive-class fraction of the reached leaf"""
    counts = _leaf_counts(tree, rows)
    return counts[:, 0] / counts.sum(axis=1)


def dump_tree(tree, feature_names=None):
    """Indented text rendering of a tree"""
    lines = []
    stack = [(tree.root, 0, '')]
    while stack:
        node, depth, prefix = stack.pop()
        pad = '  ' * depth
        if isinstance(node, Leaf):
            lines.append(f'{pad}{prefix}leaf pos={node.n_pos} neg={node.n_neg} -> {node.label}')
            continue
        name = feature_names[node.feature] if feature_names else f'x[{node.feature}]'
        lines.append(f'{pad}{prefix}{name} <= {node.threshold:.6g}')
        stack.append((node.right, depth + 1, 'else: '))
        stack.append((node.left, depth + 1, 'then: '))
    return '\n'.join(lines)
