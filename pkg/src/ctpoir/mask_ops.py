"""Binary masks, set algebra, volumes, connected components and bounding boxes"""

import dataclasses
import logging
import typing

import numpy as np
import scipy.ndimage as ndi

from ctpoir.exceptions import EmptyIntersectionError, HeaderMismatchError
from ctpoir.grid import VoxelGrid
from ctpoir.volume_io.internal import read_raw, write_raw

logger = logging.getLogger(__name__)

# 26-connectivity
CONNECTIVITY_3D = ndi.generate_binary_structure(3, 3)


@dataclasses.dataclass(frozen=True, eq=False)
class BinaryMask3D(VoxelGrid):
    """Boolean mask aligned to a volume"""

    DTYPE = np.bool_

    @classmethod
    def empty_like(cls, grid):
        return cls(np.zeros(grid.shape, dtype=bool), grid.spacing)

    @classmethod
    def full_like(cls, grid):
        return cls(np.ones(grid.shape, dtype=bool), grid.spacing)

    @property
    def count(self):
        """Number of true voxels"""
        return int(np.count_nonzero(self.voxels))

    def is_empty(self):
        return not self.voxels.any()


class SquareBox(typing.NamedTuple):
    """Square bounding box on one slice, in pixels

    (cx, cy) is the center; the square covers columns x0 .. x0 + side - 1 and
    rows y0 .. y0 + side - 1.
    """

    cx: float
    cy: float
    side: int

    @property
    def x0(self):
        return int(round(self.cx - (self.side - 1) / 2))

    @property
    def y0(self):
        return int(round(self.cy - (self.side - 1) / 2))

    def crop(self, image):
        """Crop a 2D (ny, nx) array"""
        return image[self.y0 : self.y0 + self.side, self.x0 : self.x0 + self.side]


@dataclasses.dataclass(frozen=True, eq=False)
class Region:
    """Connected component of a mask

    :param int id: Region ID, in first-voxel scan order
    :param np.ndarray coords: (N, 3) array of (x, y, z) voxel coordinates
    :param tuple dims: (nx, ny, nz) of the labeled mask
    """

    id: int
    coords: np.ndarray
    dims: tuple
    score: typing.Optional[float] = None

    def __post_init__(self):
        if len(self.coords) == 0:
            raise ValueError("Region must not be empty")

    @property
    def voxel_ids(self):
        """Set of (x, y, z) voxel coordinates"""
        return {tuple(int(v) for v in c) for c in self.coords}

    @property
    def size(self):
        return len(self.coords)

    @property
    def slice_extent(self):
        """Inclusive z range"""
        z = self.coords[:, 2]
        return int(z.min()), int(z.max())

    @property
    def slice_indices(self):
        return tuple(int(z) for z in np.unique(self.coords[:, 2]))

    def pixels_on_slice(self, slice_index):
        """(N, 2) array of (x, y) region pixels on a slice"""
        on_slice = self.coords[:, 2] == slice_index
        return self.coords[on_slice][:, :2]

    def bbox_square(self, slice_index):
        return min_square_bbox(self, slice_index)

    def to_mask(self, spacing):
        nx, ny, nz = self.dims
        voxels = np.zeros((nz, ny, nx), dtype=bool)
        x, y, z = self.coords.T
        voxels[z, y, x] = True
        return BinaryMask3D(voxels, spacing)

    def with_score(self, score):
        return dataclasses.replace(self, score=score)


def subtract(a, b):
    """a AND NOT b"""
    a.check_aligned(b)
    return a.replace(a.voxels & ~b.voxels)


def union(a, b):
    a.check_aligned(b)
    return a.replace(a.voxels | b.voxels)


def intersect(a, b):
    a.check_aligned(b)
    return a.replace(a.voxels & b.voxels)


def volume_mm3(mask):
    """Physical volume of the true voxels"""
    return mask.count * mask.voxel_volume_mm3


def label_components(mask):
    """Label 26-connected components

    Returns (labels, count) with labels renumbered 1..count in order of each
    component's first voxel in z, then y, then x scan order.
    """
    labels, count = ndi.label(mask.voxels, structure=CONNECTIVITY_3D)
    if count == 0:
        return labels, 0
    flat = labels.ravel()
    found, first_index = np.unique(flat, return_index=True)
    # Drop background
    first_index = first_index[found > 0]
    found = found[found > 0]
    ordered = found[np.argsort(first_index, kind="stable")]
    relabel = np.zeros(count + 1, dtype=labels.dtype)
    relabel[ordered] = np.arange(1, count + 1, dtype=labels.dtype)
    return relabel[labels], count


def connected_components(mask):
    """Partition true voxels into 26-connected regions"""
    labels, count = label_components(mask)
    if count == 0:
        return []
    z, y, x = np.nonzero(labels)
    values = labels[z, y, x]
    # Group voxel coordinates by label, keeping scan order within a region
    order = np.argsort(values, kind="stable")
    coords = np.stack((x, y, z), axis=1)[order]
    bounds = np.searchsorted(values[order], np.arange(1, count + 2))
    regions = [
        Region(id=i, coords=coords[bounds[i] : bounds[i + 1]], dims=mask.dims)
        for i in range(count)
    ]
    logger.debug("Found %d connected components", count)
    return regions


def _place(low, high, side, size):
    """Square start covering [low, high], shifted inside [0, size)"""
    start = low - (side - (high - low + 1)) // 2
    return max(min(start, size - side), 0)


def min_square_bbox(region, slice_index):
    """Minimum circumscribed square of the region's pixels on a slice

    Side is the larger extent of the tight rectangle. The square is centered on
    the rectangle and shifted, never shrunk, to stay inside the image.
    """
    pixels = region.pixels_on_slice(slice_index)
    if len(pixels) == 0:
        raise EmptyIntersectionError(
            f"Region {region.id} does not intersect slice {slice_index}"
        )
    nx, ny, _ = region.dims
    x_lo, y_lo = pixels.min(axis=0)
    x_hi, y_hi = pixels.max(axis=0)
    side = int(max(x_hi - x_lo + 1, y_hi - y_lo + 1))
    x0 = _place(int(x_lo), int(x_hi), side, nx)
    y0 = _place(int(y_lo), int(y_hi), side, ny)
    return SquareBox(x0 + (side - 1) / 2, y0 + (side - 1) / 2, side)


def write_mask(mask, path):
    """Write a mask in the internal format, dtype u8, values 0 or 1"""
    write_raw(
        path,
        mask.voxels.astype(np.uint8),
        {"spacing": mask.spacing, "dtype": "u8"},
    )


def read_mask(path):
    """Read a mask from the internal format"""
    header, array = read_raw(path, dtype="u8")
    if np.any(array > 1):
        raise HeaderMismatchError(f"{path}: mask values must be 0 or 1")
    return BinaryMask3D(array.astype(bool), header["spacing"])
