"""Voxel grid base

Every volumetric object (CT volume, gray volume, mask, probability map) is a
read-only numpy array of shape (nz, ny, nx) plus the physical spacing
(sx, sy, sz) in mm. Dimensions are reported as (nx, ny, nz).
"""

import dataclasses

import numpy as np

from ctpoir.exceptions import DimMismatchError


@dataclasses.dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Immutable voxel grid

    :param np.ndarray voxels: Array of shape (nz, ny, nx)
    :param tuple spacing: (sx, sy, sz) in mm
    """

    voxels: np.ndarray
    spacing: tuple

    DTYPE = None

    def __post_init__(self):
        voxels = np.asarray(self.voxels)
        if self.DTYPE is not None and voxels.dtype != self.DTYPE:
            voxels = voxels.astype(self.DTYPE)
        if voxels.ndim != 3:
            raise ValueError(f"Voxel array must be 3D, got shape {voxels.shape}")
        if min(voxels.shape) < 1:
            raise ValueError(f"Empty voxel array {voxels.shape}")
        spacing = tuple(float(s) for s in self.spacing)
        if len(spacing) != 3 or min(spacing) <= 0:
            raise ValueError(f"Invalid spacing {self.spacing}")
        if voxels.flags.writeable:
            voxels = voxels.copy()
            voxels.flags.writeable = False
        object.__setattr__(self, "voxels", voxels)
        object.__setattr__(self, "spacing", spacing)

    @property
    def dims(self):
        """(nx, ny, nz)"""
        nz, ny, nx = self.voxels.shape
        return (nx, ny, nz)

    @property
    def shape(self):
        """Array shape (nz, ny, nx)"""
        return self.voxels.shape

    @property
    def voxel_volume_mm3(self):
        sx, sy, sz = self.spacing
        return sx * sy * sz

    @property
    def pixel_area_mm2(self):
        sx, sy, _ = self.spacing
        return sx * sy

    def check_aligned(self, other):
        """Raise DimMismatchError unless other has the same dims and spacing"""
        if self.dims != other.dims:
            raise DimMismatchError(f"Dimension mismatch: {self.dims} != {other.dims}")
        if not np.allclose(self.spacing, other.spacing, rtol=1e-6, atol=0):
            raise DimMismatchError(
                f"Spacing mismatch: {self.spacing} != {other.spacing}"
            )

    def replace(self, voxels, **changes):
        """Return a grid of the same kind with new voxels"""
        return dataclasses.replace(self, voxels=voxels, **changes)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        for field in dataclasses.fields(self):
            if not field.compare:
                continue
            mine, theirs = getattr(self, field.name), getattr(other, field.name)
            if isinstance(mine, np.ndarray):
                if mine.dtype != theirs.dtype or not np.array_equal(mine, theirs):
                    return False
            elif mine != theirs:
                return False
        return True

    __hash__ = None
