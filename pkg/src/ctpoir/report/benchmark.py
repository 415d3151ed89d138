"""Benchmark evaluation

Summarizes predictions of several methods against ground truth: m-Dice per
method and structure, then Pearson's r and mAPE over PoIR pairs.

On disk, ground truth lives in gt_dir/<case>/{lung,infected}.json and
predictions in pred_dir/<method>/<case>/{lung,infected}.json. A structure a
method does not predict is simply absent.
"""

import csv
import dataclasses
import json
import logging
import typing
from pathlib import Path

import marshmallow as ma

from ctpoir.exceptions import ConfigError, EmptyListError, VolumeIOError
from ctpoir.extensions import map_ordered
from ctpoir.mask_ops import intersect, read_mask
from ctpoir.metrics import (
    PairedSeries,
    accuracy_at,
    best_operating_point,
    dice,
    mape,
    pearson,
    poir,
    roc_auc,
)
from ctpoir.region_filter.regions import DEFAULT_FILTER_THRESHOLD
from ctpoir.threshold_seg import INFECTED_MASK_FILE, LUNG_MASK_FILE

from .schemas import MetricsSummarySchema

logger = logging.getLogger(__name__)

LUNG = "intact lung"
INFECTED = "infected region"
STRUCTURE_FILES = {LUNG: LUNG_MASK_FILE, INFECTED: INFECTED_MASK_FILE}
CLASSIFIER_SUFFIX = " + classifier"


@dataclasses.dataclass(frozen=True, eq=False)
class BenchmarkCase:
    """Ground truth and predictions of one case

    :param dict ground_truth: Structure -> mask
    :param dict predictions: Method -> {structure -> mask}
    """

    case_id: str
    ground_truth: dict
    predictions: dict


@dataclasses.dataclass(frozen=True)
class SummaryRow:
    method: str
    structure: str
    m_dice: float
    n_cases: int
    improvement_percent: typing.Optional[float] = None


@dataclasses.dataclass(frozen=True)
class PoirPair:
    case_id: str
    predicted: float
    ground_truth: float


@dataclasses.dataclass(frozen=True)
class ClassifierSummary:
    n: int
    auc: float
    threshold: float
    accuracy: float
    best_threshold: float
    best_accuracy: float


@dataclasses.dataclass(frozen=True)
class MetricsSummary:
    """Table of m-Dice per method and structure, with PoIR agreement"""

    rows: tuple
    poir_method: typing.Optional[str]
    poir_pairs: tuple
    pearson_r: typing.Optional[float]
    mape_percent: typing.Optional[float]
    classifier: typing.Optional[ClassifierSummary] = None

    def row(self, method, structure):
        for row in self.rows:
            if row.method == method and row.structure == structure:
                return row
        raise KeyError((method, structure))


def _case_dice(case):
    """{(method, structure): Dice} for one case"""
    result = {}
    for method, masks in case.predictions.items():
        for structure, mask in masks.items():
            if structure in case.ground_truth:
                result[(method, structure)] = dice(mask, case.ground_truth[structure])
    return result


def _case_poir(case, method):
    masks = case.predictions[method]
    lung = masks[LUNG]
    predicted = poir(intersect(masks[INFECTED], lung), lung)
    truth = poir(case.ground_truth[INFECTED], case.ground_truth[LUNG])
    return PoirPair(case.case_id, predicted, truth)


def _improvements(rows):
    """Set improvement_percent of "+ classifier" rows vs their base method"""
    by_key = {(row.method, row.structure): row for row in rows}
    result = []
    for row in rows:
        if row.method.endswith(CLASSIFIER_SUFFIX):
            base = by_key.get((row.method[: -len(CLASSIFIER_SUFFIX)], row.structure))
            if base is not None and base.m_dice > 0:
                change = (row.m_dice - base.m_dice) / base.m_dice * 100
                row = dataclasses.replace(row, improvement_percent=change)
        result.append(row)
    return tuple(result)


def _poir_candidates(cases, methods):
    """Methods predicting both structures on every case with full ground truth"""
    poir_cases = [c for c in cases if {LUNG, INFECTED} <= set(c.ground_truth)]
    if not poir_cases:
        return poir_cases, []
    candidates = [
        method
        for method in methods
        if all(
            {LUNG, INFECTED} <= set(c.predictions.get(method, {})) for c in poir_cases
        )
    ]
    return poir_cases, candidates


def classifier_summary(scores, labels, threshold=DEFAULT_FILTER_THRESHOLD):
    """ROC statistics of region scores against region labels"""
    curve = roc_auc(scores, labels)
    best_threshold, best_accuracy = best_operating_point(scores, labels)
    return ClassifierSummary(
        n=len(scores),
        auc=curve.auc,
        threshold=threshold,
        accuracy=accuracy_at(scores, labels, threshold),
        best_threshold=best_threshold,
        best_accuracy=best_accuracy,
    )


def evaluate_benchmark(cases, poir_method=None, classifier=None, threads=1):
    """Summarize a benchmark

    :param list cases: BenchmarkCase list
    :param str poir_method: Method giving predicted PoIR, defaults to the method
        with the best infected region m-Dice
    :param tuple classifier: (scores, labels) of region classifier outputs
    :param int threads: Number of cases evaluated concurrently
    """
    if not cases:
        raise EmptyListError("Benchmark holds no case")
    # Aggregation order is fixed by case ID
    cases = sorted(cases, key=lambda c: c.case_id)
    per_case = map_ordered(_case_dice, cases, threads)

    methods = sorted({m for case in cases for m in case.predictions})
    rows = []
    for method in methods:
        for structure in (LUNG, INFECTED):
            key = (method, structure)
            values = [d[key] for d in per_case if key in d]
            if values:
                m_dice = sum(values) / len(values)
                rows.append(SummaryRow(method, structure, m_dice, len(values)))
    rows = _improvements(rows)

    poir_cases, candidates = _poir_candidates(cases, methods)
    if poir_method is None and candidates:
        infected_rows = [
            r for r in rows if r.structure == INFECTED and r.method in candidates
        ]
        # Ties go to the first method in sorted order
        poir_method = max(infected_rows, key=lambda r: r.m_dice).method
    pairs, pearson_r, mape_percent = (), None, None
    if poir_method is not None:
        if poir_method not in candidates:
            raise ConfigError(
                f"Method {poir_method!r} lacks lung or infected masks for PoIR"
            )
        pairs = tuple(
            map_ordered(lambda c: _case_poir(c, poir_method), poir_cases, threads)
        )
        series = PairedSeries((p.predicted, p.ground_truth) for p in pairs)
        mape_percent = mape(series)
        if series.n >= 2:
            pearson_r = pearson(series)
        else:
            logger.warning("Pearson's r needs at least 2 cases")

    summary = MetricsSummary(
        rows=rows,
        poir_method=poir_method,
        poir_pairs=pairs,
        pearson_r=pearson_r,
        mape_percent=mape_percent,
        classifier=classifier_summary(*classifier) if classifier is not None else None,
    )
    logger.info(
        "Benchmark: %d cases, %d methods, PoIR method %s",
        len(cases),
        len(methods),
        poir_method,
    )
    return summary


def _read_structures(directory):
    masks = {}
    for structure, file_name in STRUCTURE_FILES.items():
        if (directory / file_name).is_file():
            masks[structure] = read_mask(directory / file_name)
    return masks


def load_benchmark(gt_dir, pred_dir):
    """Read ground truth and prediction masks from directories"""
    gt_dir, pred_dir = Path(gt_dir), Path(pred_dir)
    for directory in (gt_dir, pred_dir):
        if not directory.is_dir():
            raise VolumeIOError(f"{directory} is not a directory")
    ground_truth = {
        d.name: _read_structures(d) for d in sorted(gt_dir.iterdir()) if d.is_dir()
    }
    predictions = {case_id: {} for case_id in ground_truth}
    for method_dir in sorted(d for d in pred_dir.iterdir() if d.is_dir()):
        for case_dir in sorted(d for d in method_dir.iterdir() if d.is_dir()):
            if case_dir.name not in ground_truth:
                logger.warning(
                    "No ground truth for case %s (method %s), skipped",
                    case_dir.name,
                    method_dir.name,
                )
                continue
            masks = _read_structures(case_dir)
            if masks:
                predictions[case_dir.name][method_dir.name] = masks
    return [
        BenchmarkCase(case_id, ground_truth[case_id], predictions[case_id])
        for case_id in ground_truth
    ]


def read_classifier_csv(path):
    """Read (scores, labels) from a CSV file with columns score, label"""
    path = Path(path)
    scores, labels = [], []
    try:
        with open(path, newline="", encoding="utf-8") as csv_f:
            reader = csv.DictReader(csv_f)
            for row in reader:
                try:
                    score = float(row["score"])
                    label = int(row["label"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise VolumeIOError(
                        f"{path}, line {reader.line_num}: expected score,label"
                    ) from exc
                if label not in (0, 1):
                    raise VolumeIOError(
                        f"{path}, line {reader.line_num}: label must be 0 or 1"
                    )
                scores.append(score)
                labels.append(bool(label))
    except OSError as exc:
        raise VolumeIOError(f"Can't read classifier file {path}: {exc}") from exc
    return scores, labels


def write_summary(summary, path):
    """Write a summary as JSON"""
    text = json.dumps(MetricsSummarySchema().dump(summary), indent=2) + "\n"
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise VolumeIOError(f"Can't write summary {path}: {exc}") from exc


def read_summary(path):
    """Read a summary written by write_summary"""
    try:
        data = MetricsSummarySchema().load(json.loads(Path(path).read_text("utf-8")))
    except OSError as exc:
        raise VolumeIOError(f"Can't read summary {path}: {exc}") from exc
    except (ValueError, ma.ValidationError) as exc:
        raise VolumeIOError(f"Invalid summary {path}: {exc}") from exc
    data["rows"] = tuple(SummaryRow(**row) for row in data["rows"])
    data["poir_pairs"] = tuple(PoirPair(**pair) for pair in data["poir_pairs"])
    if data["classifier"] is not None:
        data["classifier"] = ClassifierSummary(**data["classifier"])
    return MetricsSummary(**data)
