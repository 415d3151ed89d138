"""HU clipping, gray normalization and HU histograms"""

import csv
import dataclasses
import logging
import math

import numpy as np

from ctpoir.exceptions import OutOfRangeError
from ctpoir.grid import VoxelGrid

logger = logging.getLogger(__name__)

HU_FLOOR = -1200
HU_CEILING = 600
GRAY_MAX = 255


@dataclasses.dataclass(frozen=True, eq=False)
class GrayVolume(VoxelGrid):
    """8-bit gray volume"""

    DTYPE = np.uint8


@dataclasses.dataclass(frozen=True)
class HuHistogram:
    """HU histogram

    Bins are left-closed right-open, except the last one which is closed.
    """

    bin_edges: tuple
    counts: tuple

    def __post_init__(self):
        if len(self.bin_edges) != len(self.counts) + 1:
            raise ValueError("Need one more bin edge than counts")
        if any(b >= a for a, b in zip(self.bin_edges[1:], self.bin_edges[:-1])):
            raise ValueError("Bin edges must be strictly increasing")

    @property
    def total(self):
        return sum(self.counts)

    def fraction_within(self, low, high):
        """Fraction of counts in bins lying entirely within [low, high]"""
        if self.total == 0:
            return 0.0
        bins = zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts)
        inside = sum(count for lo, hi, count in bins if lo >= low and hi <= high)
        return inside / self.total

    def write_csv(self, stream):
        """Write as CSV with columns bin_lo, bin_hi, count"""
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(("bin_lo", "bin_hi", "count"))
        for lo, hi, count in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts):
            writer.writerow((lo, hi, count))


def clip_hu(volume):
    """Clip HU values to [-1200, 600]"""
    return volume.replace(np.clip(volume.voxels, HU_FLOOR, HU_CEILING))


def normalize_to_gray(volume):
    """Map clipped HU linearly to [0, 255], rounding half up

    g = round_half_up((hu + 1200) / 1800 * 255), evaluated in exact integer
    arithmetic.
    """
    hu = volume.voxels.astype(np.int64)
    if hu.min() < HU_FLOOR or hu.max() > HU_CEILING:
        raise OutOfRangeError(
            f"HU values must lie in [{HU_FLOOR}, {HU_CEILING}], "
            f"got [{hu.min()}, {hu.max()}]; clip first"
        )
    span = HU_CEILING - HU_FLOOR
    # floor(x / span * 255 + 1/2) == (2 * 255 * x + span) // (2 * span)
    gray = (2 * GRAY_MAX * (hu - HU_FLOOR) + span) // (2 * span)
    return GrayVolume(gray.astype(np.uint8), volume.spacing)


def histogram_edges(bin_width):
    """Bin edges tiling [-1200, 600], the last bin possibly narrower

    :param float bin_width: Bin width in HU, integer or not
    """
    if not bin_width > 0:
        raise ValueError(f"Bin width must be positive, got {bin_width}")
    count = math.ceil((HU_CEILING - HU_FLOOR) / bin_width)
    edges = [HU_FLOOR + k * bin_width for k in range(count)]
    # Rounding may push the last computed edge onto the ceiling
    edges = [edge for edge in edges if edge < HU_CEILING]
    edges.append(HU_CEILING)
    return tuple(edges)


def hu_histogram(volume, mask, bin_width):
    """Histogram of HU values of voxels inside mask

    Values are clipped to [-1200, 600] before binning.
    """
    volume.check_aligned(mask)
    edges = histogram_edges(bin_width)
    values = np.clip(volume.voxels[mask.voxels], HU_FLOOR, HU_CEILING)
    counts, _ = np.histogram(values, bins=np.asarray(edges, dtype=np.float64))
    return HuHistogram(edges, tuple(int(c) for c in counts))
