"""HU threshold segmentation

Threshold masks, the threshold sweeps for intact lung and infected regions,
and the bootstrap of initial ("dirty") labels.
"""

import dataclasses
import logging
from pathlib import Path

import numpy as np
import scipy.ndimage as ndi

from ctpoir import metrics
from ctpoir.exceptions import OutOfRangeError
from ctpoir.extensions import map_ordered
from ctpoir.mask_ops import (
    BinaryMask3D,
    intersect,
    label_components,
    subtract,
    write_mask,
)
from ctpoir.preprocess import HU_CEILING, HU_FLOOR
from ctpoir.volume_io.internal import make_dir

logger = logging.getLogger(__name__)

# -800, -750, ..., -50, 0
SWEEP_THRESHOLDS = tuple(range(-800, 1, 50))
DEFAULT_LUNG_THRESHOLD = -200
DEFAULT_INFECTED_THRESHOLD = -750
# Lungs kept after removing background air
MAX_LUNG_COMPONENTS = 2

LUNG_MASK_FILE = "lung.json"
INFECTED_MASK_FILE = "infected.json"


@dataclasses.dataclass(frozen=True)
class SweepResult:
    """Outcome of a threshold sweep

    :param tuple entries: (threshold, m-Dice) for every sweep threshold
    :param int best_threshold: Threshold reaching the maximum m-Dice
    :param tuple best_masks: Masks at best threshold, one per case
    """

    entries: tuple
    best_threshold: int
    best_masks: tuple

    @property
    def best_dice(self):
        return dict(self.entries)[self.best_threshold]

    @property
    def best_mask(self):
        """Mask at best threshold of a single-case sweep"""
        if len(self.best_masks) != 1:
            raise ValueError("Benchmark sweep holds one mask per case")
        return self.best_masks[0]


def threshold_mask(volume, threshold):
    """Raw threshold mask {HU <= threshold}"""
    return BinaryMask3D(volume.voxels <= threshold, volume.spacing)


def _border_labels(labels):
    """Labels touching the x/y border of any slice"""
    border = np.concatenate(
        (
            labels[:, 0, :].ravel(),
            labels[:, -1, :].ravel(),
            labels[:, :, 0].ravel(),
            labels[:, :, -1].ravel(),
        )
    )
    return np.unique(border[border > 0])


def remove_background(mask, max_components=MAX_LUNG_COMPONENTS):
    """Drop components touching the x/y border, keep the largest remaining ones

    Size ties are broken by scan order.
    """
    labels, count = label_components(mask)
    if count == 0:
        return mask
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    sizes[0] = 0
    sizes[_border_labels(labels)] = 0
    candidates = np.flatnonzero(sizes)
    kept = candidates[np.argsort(-sizes[candidates], kind="stable")][:max_components]
    return mask.replace(np.isin(labels, kept))


def fill_lung_holes(mask):
    """Fill holes enclosed within each axial slice"""
    filled = np.stack([ndi.binary_fill_holes(s) for s in mask.voxels])
    return mask.replace(filled)


def segment_by_threshold(volume, threshold, fill_holes=False):
    """Segment lungs as {HU <= threshold}, minus background air

    Components touching the x/y border of the volume are deleted, then at most
    the two largest remaining components are kept.

    :param CtVolume volume: Volume
    :param int threshold: HU threshold, in [-1200, 600]
    :param bool fill_holes: Fill enclosed holes per slice (intact lung)
    """
    if not HU_FLOOR <= threshold <= HU_CEILING:
        raise OutOfRangeError(
            f"Threshold {threshold} outside [{HU_FLOOR}, {HU_CEILING}]"
        )
    mask = remove_background(threshold_mask(volume, threshold))
    if fill_holes:
        mask = fill_lung_holes(mask)
    return mask


def infected_candidate(volume, lung_mask, threshold):
    """Lung minus its voxels below threshold, i.e. lung AND {HU > threshold}"""
    below = intersect(threshold_mask(volume, threshold), lung_mask)
    return subtract(lung_mask, below)


def _sweep(cases, make_candidate, threads):
    """Evaluate every sweep threshold by m-Dice over cases

    :param list cases: (volume, reference mask, ground truth) tuples
    :param callable make_candidate: f(volume, reference, threshold) -> mask
    """

    def evaluate(threshold):
        return metrics.mean_dice(
            [(make_candidate(volume, ref, threshold), gt) for volume, ref, gt in cases]
        )

    scores = map_ordered(evaluate, SWEEP_THRESHOLDS, threads)
    entries = tuple(zip(SWEEP_THRESHOLDS, scores))
    best_threshold, best_dice = entries[0]
    # Ties go to the lower threshold
    for threshold, score in entries[1:]:
        if score > best_dice:
            best_threshold, best_dice = threshold, score
    logger.info("Sweep best threshold %d (m-Dice %.4f)", best_threshold, best_dice)
    best_masks = tuple(
        make_candidate(volume, ref, best_threshold) for volume, ref, _ in cases
    )
    return SweepResult(entries, best_threshold, best_masks)


def _lung_candidate(volume, _ref, threshold):
    return segment_by_threshold(volume, threshold)


def sweep_lung_threshold_benchmark(cases, threads=1):
    """Lung threshold sweep over (volume, gt_lung) cases, by m-Dice"""
    return _sweep([(v, None, gt) for v, gt in cases], _lung_candidate, threads)


def sweep_lung_threshold(volume, gt_lung, threads=1):
    """Lung threshold maximizing Dice against gt_lung"""
    volume.check_aligned(gt_lung)
    return sweep_lung_threshold_benchmark([(volume, gt_lung)], threads=threads)


def infected_by_subtraction_benchmark(cases, threads=1):
    """Infected threshold sweep over (volume, lung_mask, gt_infected) cases"""
    return _sweep(list(cases), infected_candidate, threads)


def infected_by_subtraction(volume, lung_mask, gt_infected, threads=1):
    """Infected threshold maximizing Dice of lung minus {HU <= t}"""
    volume.check_aligned(lung_mask)
    return infected_by_subtraction_benchmark(
        [(volume, lung_mask, gt_infected)], threads=threads
    )


def bootstrap_labels(
    volume,
    t_lung=DEFAULT_LUNG_THRESHOLD,
    t_inf=DEFAULT_INFECTED_THRESHOLD,
    fill_holes=True,
    out_dir=None,
):
    """Initial lung and infected labels from fixed HU thresholds

    No ground truth is needed. When out_dir is given, both masks are written
    there in the mask file format.

    Returns (lung_mask, infected_mask).
    """
    lung = segment_by_threshold(volume, t_lung, fill_holes=fill_holes)
    infected = infected_candidate(volume, lung, t_inf)
    logger.info(
        "Bootstrap labels: lung %d voxels (t=%d), infected %d voxels (t=%d)",
        lung.count,
        t_lung,
        infected.count,
        t_inf,
    )
    if out_dir is not None:
        export_labels(lung, infected, out_dir)
    return lung, infected


def export_labels(lung, infected, out_dir):
    """Write lung and infected masks in out_dir"""
    out_dir = Path(out_dir)
    make_dir(out_dir)
    write_mask(lung, out_dir / LUNG_MASK_FILE)
    write_mask(infected, out_dir / INFECTED_MASK_FILE)
