#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Fairness and predictive-performance metrics.

Fairness metrics compare outcome rates between the two values (0 and 1) of a
binary protected feature:
- SPD: Pr(Y^=1|P=0) - Pr(Y^=1|P=1)              optimum 0
- DI:  Pr(Y^=1|P=0) / Pr(Y^=1|P=1)              optimum 1
- ADI: min(DI, 1/DI)                            optimum 1, in (0, 1]
- EPD: TPR and FPR differences between P=0 and P=1
- EOD: TPR(P=0) - TPR(P=1)
"""

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np
from sklearn.metrics import roc_auc_score

from faironb.errors import UndefinedMetricError


class DIFlag(str, Enum):
    OK = 'ok'
    INFINITE = 'infinite'
    UNDEFINED = 'undefined'


@dataclass(frozen=True)
class OutcomeCounts:
    """Confusion counts for one protected value"""
    n_total: int
    n_pred_pos: int
    n_actual_pos: int
    n_true_pos: int
    n_false_pos: int

    def __post_init__(self):
        if min(self.n_total, self.n_pred_pos, self.n_actual_pos,
               self.n_true_pos, self.n_false_pos) < 0:
            raise ValueError('Outcome counts must be non-negative')
        if self.n_pred_pos > self.n_total:
            raise ValueError('More predicted positives than rows')
        if self.n_true_pos > self.n_actual_pos:
            raise ValueError('More true positives than actual positives')
        if self.n_false_pos > self.n_total - self.n_actual_pos:
            raise ValueError('More false positives than actual negatives')

    @property
    def positive_rate(self):
        if self.n_total == 0:
            raise UndefinedMetricError('Positive rate of an empty protected group')
        return self.n_pred_pos / self.n_total

    @property
    def tpr(self):
        if self.n_actual_pos == 0:
            raise UndefinedMetricError('TPR undefined: no actual positives')
        return self.n_true_pos / self.n_actual_pos

    @property
    def fpr(self):
        negatives = self.n_total - self.n_actual_pos
        if negatives == 0:
            raise UndefinedMetricError('FPR undefined: no actual negatives')
        return self.n_false_pos / negatives


@dataclass(frozen=True)
class GroupOutcomeCounts:
    """Outcome counts for protected values 0 and 1"""
    p0: OutcomeCounts
    p1: OutcomeCounts

    def __getitem__(self, value):
        return self.p0 if value == 0 else self.p1

    @classmethod
    def from_arrays(cls, protected, y_true, y_pred):
        protected = np.asarray(protected).astype(int)
        y_true = np.asarray(y_true).astype(int)
        y_pred = np.asarray(y_pred).astype(int)
        parts = []
        for v in (0, 1):
            mask = protected == v
            t, p = y_true[mask], y_pred[mask]
            parts.append(OutcomeCounts(
                n_total=int(mask.sum()),
                n_pred_pos=int(p.sum()),
                n_actual_pos=int(t.sum()),
                n_true_pos=int((t & p).sum()),
                n_false_pos=int(((1 - t) & p).sum()),
            ))
        return cls(*parts)

    @classmethod
    def from_rates(cls, rate0, rate1, n=1000):
        """Counts reproducing two positive rates (predictions equal labels)"""
        pos0, pos1 = round(rate0 * n), round(rate1 * n)
        return cls(OutcomeCounts(n, pos0, pos0, pos0, 0), OutcomeCounts(n, pos1, pos1, pos1, 0))


def spd(counts):
    """Statistical Parity Difference"""
    return counts.p0.positive_rate - counts.p1.positive_rate


def di_flag(counts):
    r0, r1 = counts.p0.positive_rate, counts.p1.positive_rate
    if r1 == 0:
        return DIFlag.UNDEFINED if r0 == 0 else DIFlag.INFINITE
    return DIFlag.OK


def di(counts):
    """
    Disparate Impact.

    Returns math.inf when P=1 has no predicted positives, and 1.0 when
    neither value has any (check di_flag to tell it from a real 1).
    """
    r0, r1 = counts.p0.positive_rate, counts.p1.positive_rate
    if r1 == 0:
        return 1.0 if r0 == 0 else math.inf
    return r0 / r1


def adi(di_value):
    """Adapted Disparate Impact; 0.0 for sentinel (infinite, zero or NaN) inputs"""
    if di_value is None or not math.isfinite(di_value) or di_value <= 0:
        return 0.0
    return di_value if di_value <= 1.0 else 1.0 / di_value


def epd(counts):
    """Equal Probability Difference: (TPR difference, FPR difference)"""
    return (counts.p0.tpr - counts.p1.tpr, counts.p0.fpr - counts.p1.fpr)


def eod(counts):
    """Equal Opportunity Difference"""
    return counts.p0.tpr - counts.p1.tpr


def auc(scores, labels):
    """
    Area under the ROC curve: the probability that a random positive scores
    above a random negative, ties counting 1/2.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(int)
    if len(np.unique(labels)) < 2:
        raise UndefinedMetricError('AUC needs both classes among the labels')
    return float(roc_auc_score(labels, scores))


def accuracy(preds, labels):
    preds = np.asarray(preds).astype(int)
    labels = np.asarray(labels).astype(int)
    if len(labels) == 0:
        raise UndefinedMetricError('Accuracy of an empty prediction set')
    if preds.shape != labels.shape:
        raise ValueError(f'{len(preds)} predictions for {len(labels)} labels')
    return float((preds == labels).mean())


@dataclass(frozen=True)
class FeatureFairness:
    spd: float
    di: float
    adi: float
    epd_tpr: float
    epd_fpr: float
    eod: float
    di_flag: DIFlag = DIFlag.OK


@dataclass(frozen=True, eq=False)
class FairnessReport:
    per_feature: dict

    @property
    def total_di_distance(self):
        return total_di_distance(self)

    @property
    def total_adi_distance(self):
        return total_adi_distance(f.adi for f in self.per_feature.values())


def _or_nan(fn, counts):
    try:
        return fn(counts)
    except UndefinedMetricError:
        return math.nan


def feature_fairness(counts):
    """All fairness metrics of one protected feature; undefined rates become NaN"""
    value = di(counts)
    tpr_diff, fpr_diff = math.nan, math.nan
    try:
        tpr_diff = counts.p0.tpr - counts.p1.tpr
    except UndefinedMetricError:
        pass
    try:
        fpr_diff = counts.p0.fpr - counts.p1.fpr
    except UndefinedMetricError:
        pass
    return FeatureFairness(
        spd=spd(counts),
        di=value,
        adi=adi(value),
        epd_tpr=tpr_diff,
        epd_fpr=fpr_diff,
        eod=_or_nan(eod, counts),
        di_flag=di_flag(counts),
    )


def fairness_report(ds, y_true, y_pred):
    """
    Fairness metrics of predictions for every protected feature of ``ds``.

    Raises:
        UndefinedMetricError: a protected value has no rows in ``ds``
    """
    per_feature = {}
    for name in ds.schema.protected_features:
        counts = GroupOutcomeCounts.from_arrays(ds.protected(name), y_true, y_pred)
        per_feature[name] = feature_fairness(counts)
    return FairnessReport(per_feature=per_feature)


def total_di_distance(report):
    """
    Sum over protected features of |DI - 1|.

    Args:
        report (FairnessReport | dict | iterable): a report, a feature->DI
            mapping or plain DI values

    Raises:
        UndefinedMetricError: a DI is a sentinel (infinite or undefined)
    """
    if isinstance(report, FairnessReport):
        for name, f in report.per_feature.items():
            if f.di_flag != DIFlag.OK:
                raise UndefinedMetricError(f'DI of {name!r} is {f.di_flag.value}')
        values = [f.di for f in report.per_feature.values()]
    elif isinstance(report, dict):
        values = list(report.values())
    else:
        values = list(report)
    if any(not math.isfinite(v) for v in values):
        raise UndefinedMetricError('Total DI distance needs finite DI values')
    return float(sum(abs(v - 1.0) for v in values))


def total_adi_distance(adis):
    """Sum over protected features of 1 - ADI"""
    return float(sum(1.0 - a for a in adis))
