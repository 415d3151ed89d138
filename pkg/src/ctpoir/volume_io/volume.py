"""CT volume"""

import dataclasses
import logging

import numpy as np

from ctpoir.grid import VoxelGrid

logger = logging.getLogger(__name__)


def to_hu_int16(values):
    """Round half away from zero, clip to the signed 16-bit range"""
    hu = np.asarray(values, dtype=np.float64)
    hu = np.sign(hu) * np.floor(np.abs(hu) + 0.5)
    info = np.iinfo(np.int16)
    if hu.size and (hu.min() < info.min or hu.max() > info.max):
        logger.warning("HU values clipped to the signed 16-bit range")
        hu = np.clip(hu, info.min, info.max)
    return hu.astype(np.int16)


@dataclasses.dataclass(frozen=True)
class SliceMeta:
    """Calibration and position of one DICOM slice"""

    index: int
    z_position_mm: float
    rescale_slope: float
    rescale_intercept: float

    def __post_init__(self):
        if self.rescale_slope == 0:
            raise ValueError("Rescale slope must not be zero")


@dataclasses.dataclass(frozen=True, eq=False)
class CtVolume(VoxelGrid):
    """Signed 16-bit HU volume, slices sorted by ascending z"""

    case_id: str = ""
    slices: tuple = dataclasses.field(default=(), compare=False)

    DTYPE = np.int16
