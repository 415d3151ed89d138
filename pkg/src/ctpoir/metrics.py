"""Evaluation metrics

Dice, m-Dice, PoIR, Pearson correlation, mean absolute percent error and
ROC / AUC of region scorers.
"""

import dataclasses
import logging

import numpy as np
from scipy import stats
from sklearn import metrics as sk_metrics

from ctpoir.exceptions import (
    EmptyListError,
    EmptyLungError,
    SingleClassError,
    ZeroGroundTruthError,
    ZeroVarianceError,
)
from ctpoir.mask_ops import volume_mm3

logger = logging.getLogger(__name__)


def dice(a, b):
    """Dice similarity coefficient 2|A∩B| / (|A| + |B|)

    Two empty masks agree perfectly: 1.0.
    """
    a.check_aligned(b)
    total = a.count + b.count
    if total == 0:
        return 1.0
    common = int(np.count_nonzero(a.voxels & b.voxels))
    return 2 * common / total


def mean_dice(cases):
    """Unweighted mean of Dice over (prediction, ground truth) pairs"""
    cases = list(cases)
    if not cases:
        raise EmptyListError("Mean Dice of an empty case list")
    return sum(dice(pred, gt) for pred, gt in cases) / len(cases)


def poir(infected, lung):
    """Proportion of infected regions: infected volume / lung volume, a fraction"""
    infected.check_aligned(lung)
    lung_volume = volume_mm3(lung)
    if lung_volume == 0:
        raise EmptyLungError("Lung volume is zero")
    return volume_mm3(infected) / lung_volume


@dataclasses.dataclass(frozen=True)
class PairedSeries:
    """Paired observations (x_i, y_i)"""

    pairs: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "pairs", tuple((float(x), float(y)) for x, y in self.pairs)
        )

    @classmethod
    def from_xy(cls, xs, ys):
        xs, ys = list(xs), list(ys)
        if len(xs) != len(ys):
            raise ValueError(f"Series lengths differ: {len(xs)} != {len(ys)}")
        return cls(tuple(zip(xs, ys)))

    @property
    def n(self):
        return len(self.pairs)

    @property
    def xs(self):
        return np.array([x for x, _ in self.pairs], dtype=np.float64)

    @property
    def ys(self):
        return np.array([y for _, y in self.pairs], dtype=np.float64)


def pearson(series):
    """Pearson's correlation coefficient"""
    xs, ys = series.xs, series.ys
    if series.n < 2:
        raise ZeroVarianceError(f"Pearson needs at least 2 pairs, got {series.n}")
    for name, values in (("x", xs), ("y", ys)):
        if np.all(values == values[0]):
            raise ZeroVarianceError(f"Series {name} is constant")
    return float(stats.pearsonr(xs, ys)[0])


def mape(series):
    """Mean absolute percent error of (predicted, ground truth) pairs, in percent"""
    if series.n == 0:
        raise EmptyListError("mAPE of an empty series")
    for index, (_, truth) in enumerate(series.pairs):
        if truth == 0:
            raise ZeroGroundTruthError(index)
    pred, truth = series.xs, series.ys
    return float(np.mean(np.abs(pred - truth) / np.abs(truth)) * 100)


@dataclasses.dataclass(frozen=True)
class RocCurve:
    """ROC curve

    :param tuple points: (fpr, tpr) by descending score threshold, from (0, 0)
        to (1, 1)
    :param tuple thresholds: Score threshold of each point after the first
    :param float auc: Area under curve (trapezoid rule)
    """

    points: tuple
    thresholds: tuple
    auc: float


def _check_scores(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("Scores and labels must be flat sequences of equal length")
    return scores, labels


def roc_auc(scores, labels):
    """ROC curve over distinct score thresholds and its AUC

    Tied scores move the curve diagonally, contributing half a unit of rank.
    """
    scores, labels = _check_scores(scores, labels)
    if labels.all() or not labels.any():
        raise SingleClassError("ROC needs both positive and negative labels")
    fpr, tpr, thresholds = sk_metrics.roc_curve(
        labels, scores, drop_intermediate=False
    )
    area = float(sk_metrics.auc(fpr, tpr))
    logger.debug("ROC over %d scores, AUC %.4f", len(scores), area)
    return RocCurve(
        points=tuple(zip(fpr.tolist(), tpr.tolist())),
        thresholds=tuple(thresholds[1:].tolist()),
        auc=area,
    )


def accuracy_at(scores, labels, threshold):
    """Accuracy of the keep rule score >= threshold"""
    scores, labels = _check_scores(scores, labels)
    if scores.size == 0:
        raise EmptyListError("Accuracy of an empty score list")
    return float(np.mean((scores >= threshold) == labels))


def best_operating_point(scores, labels):
    """Distinct score threshold maximizing accuracy, ties to the lower one

    Returns (threshold, accuracy).
    """
    scores, labels = _check_scores(scores, labels)
    if scores.size == 0:
        raise EmptyListError("Operating point of an empty score list")
    best = None
    for threshold in np.unique(scores):
        accuracy = accuracy_at(scores, labels, threshold)
        if best is None or accuracy > best[1]:
            best = (float(threshold), accuracy)
    return best
