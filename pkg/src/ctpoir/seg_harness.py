"""2.5D segmentation harness

Every slice is stacked with its two neighbors (edge slices replicated), a
segmenter predicts one probability map per stacked slice, and predictions
targeting the same slice are averaged.

A segmenter is any callable taking a SliceStack and returning an array of shape
(3, ny, nx) of probabilities in [0, 1], one map per stacked slice.
"""

import dataclasses
import logging

import numpy as np

from ctpoir.exceptions import SegmenterError, ValueOutOfRangeError
from ctpoir.extensions import map_ordered
from ctpoir.grid import VoxelGrid
from ctpoir.mask_ops import BinaryMask3D
from ctpoir.threshold_seg import segment_by_threshold
from ctpoir.volume_io.internal import read_raw, write_raw

logger = logging.getLogger(__name__)

STACK_DEPTH = 3
DEFAULT_TAU = 0.5


def _first_invalid(values):
    """(x, y, z) and value of the first voxel outside [0, 1], NaN included"""
    invalid = ~((values >= 0) & (values <= 1))
    if not invalid.any():
        return None
    z, y, x = (int(i) for i in np.argwhere(invalid)[0])
    return (x, y, z), float(values[z, y, x])


@dataclasses.dataclass(frozen=True, eq=False)
class ProbabilityMap3D(VoxelGrid):
    """Per-voxel probability in [0, 1]"""

    DTYPE = np.float32

    def __post_init__(self):
        super().__post_init__()
        invalid = _first_invalid(self.voxels)
        if invalid is not None:
            raise ValueOutOfRangeError(*invalid)

    @classmethod
    def from_mask(cls, mask):
        """1 inside mask, 0 outside"""
        return cls(mask.voxels.astype(np.float32), mask.spacing)


@dataclasses.dataclass(frozen=True, eq=False)
class SliceStack:
    """Three neighboring gray slices centered on center_index

    :param int center_index: Center slice z
    :param tuple slice_indices: (z - 1, z, z + 1) clamped to [0, nz - 1]
    :param np.ndarray pixels: Gray slices, shape (3, ny, nx)
    """

    center_index: int
    slice_indices: tuple
    pixels: np.ndarray


def stack_indices(center_index, nz):
    return tuple(
        min(max(center_index + offset, 0), nz - 1) for offset in (-1, 0, 1)
    )


def stack_slices(volume):
    """One stack per slice, stride 1, edge slices replicated"""
    _, _, nz = volume.dims
    stacks = []
    for z in range(nz):
        indices = stack_indices(z, nz)
        stacks.append(SliceStack(z, indices, volume.voxels[list(indices)]))
    return stacks


def slot_coverage(nz):
    """Number of (stack, slot) predictions targeting each slice

    Replicated slots count, so every slice gets 3.
    """
    counts = [0] * nz
    for z in range(nz):
        for index in stack_indices(z, nz):
            counts[index] += 1
    return counts


def stack_coverage(nz):
    """Number of distinct stacks containing each slice"""
    counts = [0] * nz
    for z in range(nz):
        for index in set(stack_indices(z, nz)):
            counts[index] += 1
    return counts


def _predict(segmenter, stack):
    try:
        prediction = np.asarray(segmenter(stack), dtype=np.float32)
    except SegmenterError:
        raise
    except Exception as exc:
        raise SegmenterError(stack.center_index, str(exc)) from exc
    if prediction.shape != stack.pixels.shape:
        raise SegmenterError(
            stack.center_index,
            f"prediction shape {prediction.shape} != {stack.pixels.shape}",
        )
    if _first_invalid(prediction) is not None:
        raise SegmenterError(stack.center_index, "probability outside [0, 1]")
    return prediction


def run_25d(volume, segmenter, threads=1):
    """Run a segmenter over every slice stack and average overlapping predictions

    Stacks may be evaluated in parallel. Accumulation runs in stack order, so
    the output does not depend on the thread count.

    :param GrayVolume volume: Gray volume
    :param callable segmenter: SliceStack -> (3, ny, nx) probabilities
    :param int threads: Number of stacks evaluated concurrently
    """
    stacks = stack_slices(volume)
    predictions = map_ordered(lambda s: _predict(segmenter, s), stacks, threads)
    total = np.zeros(volume.shape, dtype=np.float64)
    counts = np.zeros(volume.shape[0], dtype=np.int64)
    for stack, prediction in zip(stacks, predictions):
        for slot, index in enumerate(stack.slice_indices):
            total[index] += prediction[slot]
            counts[index] += 1
    average = total / counts[:, np.newaxis, np.newaxis]
    logger.info("2.5D inference over %d stacks", len(stacks))
    return ProbabilityMap3D(average.astype(np.float32), volume.spacing)


def binarize(probmap, tau=DEFAULT_TAU):
    """Mask of voxels with probability >= tau"""
    if np.isnan(tau):
        raise ValueError("tau must be a number")
    return BinaryMask3D(probmap.voxels >= tau, probmap.spacing)


def write_probmaps(probmap, path):
    """Write a probability map in the internal format, dtype f32"""
    write_raw(path, probmap.voxels, {"spacing": probmap.spacing, "dtype": "f32"})


def load_probmaps(path):
    """Read a probability map, checking every value lies in [0, 1]"""
    header, array = read_raw(path, dtype="f32")
    return ProbabilityMap3D(array, header["spacing"])


class MaskSegmenter:
    """Segmenter lifting a fixed mask to probabilities (1 inside, 0 outside)

    Predictions depend only on the slice index, not on the stack position.
    """

    def __init__(self, mask):
        self.mask = mask

    def __call__(self, stack):
        return self.mask.voxels[list(stack.slice_indices)].astype(np.float32)


class ThresholdSegmenter(MaskSegmenter):
    """HU threshold segmenter lifted to probabilities"""

    def __init__(self, volume, threshold, fill_holes=False):
        self.threshold = threshold
        super().__init__(segment_by_threshold(volume, threshold, fill_holes))
