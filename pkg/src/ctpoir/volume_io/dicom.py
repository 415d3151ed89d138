"""DICOM series reader

Handles the uncompressed little endian subset (explicit and implicit VR) of
single-frame axial CT slices.
"""

import logging
from pathlib import Path

import numpy as np

import pydicom
from pydicom.errors import InvalidDicomError

from ctpoir.exceptions import (
    InconsistentSeriesError,
    MissingTagError,
    UnsupportedPixelFormatError,
    UnsupportedTransferSyntaxError,
    VolumeIOError,
)
from ctpoir.extensions import map_ordered

from .volume import CtVolume, SliceMeta, to_hu_int16

logger = logging.getLogger(__name__)

PREAMBLE_LENGTH = 128
MAGIC = b"DICM"

REQUIRED_TAGS = {
    "Rows": "(0028,0010)",
    "Columns": "(0028,0011)",
    "PixelSpacing": "(0028,0030)",
    "SliceThickness": "(0018,0050)",
    "RescaleIntercept": "(0028,1052)",
    "RescaleSlope": "(0028,1053)",
    "BitsAllocated": "(0028,0100)",
    "PixelRepresentation": "(0028,0103)",
    "PixelData": "(7FE0,0010)",
}
IMAGE_POSITION_TAG = "(0020,0032)"

# Relative tolerance on slice step regularity
SLICE_STEP_TOLERANCE = 0.01


def is_dicom_file(path):
    """Check for the 128-byte preamble followed by the DICM magic"""
    try:
        with open(path, "rb") as dcm_f:
            head = dcm_f.read(PREAMBLE_LENGTH + len(MAGIC))
    except OSError:
        return False
    return head[PREAMBLE_LENGTH:] == MAGIC


def rescale_to_hu(stored, slope, intercept):
    """HU = stored * slope + intercept, rounded half away from zero"""
    return to_hu_int16(stored.astype(np.float64) * slope + intercept)


class _Slice:
    """One parsed DICOM file"""

    def __init__(self, path, dataset):
        self.path = path
        for keyword, tag in REQUIRED_TAGS.items():
            if keyword not in dataset:
                raise MissingTagError(tag, path)
        transfer_syntax = dataset.file_meta.get("TransferSyntaxUID")
        if transfer_syntax is None:
            raise MissingTagError("(0002,0010)", path)
        if transfer_syntax.is_compressed or not transfer_syntax.is_little_endian:
            raise UnsupportedTransferSyntaxError(
                f"{path}: unsupported transfer syntax {transfer_syntax.name}"
            )
        if dataset.BitsAllocated != 16:
            raise UnsupportedPixelFormatError(
                f"{path}: BitsAllocated is {dataset.BitsAllocated}, expected 16"
            )
        if int(dataset.get("SamplesPerPixel", 1)) != 1:
            raise UnsupportedPixelFormatError(f"{path}: not a grayscale image")
        if int(dataset.get("NumberOfFrames", 1)) != 1:
            raise UnsupportedPixelFormatError(f"{path}: multi-frame image")
        try:
            self.rows = int(dataset.Rows)
            self.columns = int(dataset.Columns)
            # PixelSpacing is (row spacing, column spacing), i.e. (sy, sx)
            self.pixel_spacing = tuple(float(v) for v in dataset.PixelSpacing)
            self.slice_thickness = float(dataset.SliceThickness)
            self.slope = float(dataset.RescaleSlope)
            self.intercept = float(dataset.RescaleIntercept)
        except (TypeError, ValueError) as exc:
            raise VolumeIOError(f"{path}: invalid geometry tag: {exc}") from exc
        if len(self.pixel_spacing) != 2 or not all(v > 0 for v in self.pixel_spacing):
            raise VolumeIOError(f"{path}: invalid PixelSpacing {self.pixel_spacing}")
        if not self.slice_thickness > 0:
            raise VolumeIOError(
                f"{path}: invalid SliceThickness {self.slice_thickness}"
            )
        if self.slope == 0:
            raise VolumeIOError(f"{path}: RescaleSlope is zero")
        position = dataset.get("ImagePositionPatient")
        self.z_position = float(position[2]) if position is not None else None
        instance_number = dataset.get("InstanceNumber")
        self.instance_number = (
            int(instance_number) if instance_number is not None else None
        )
        try:
            self.pixels = dataset.pixel_array
        except (ValueError, NotImplementedError, RuntimeError) as exc:
            raise UnsupportedPixelFormatError(f"{path}: {exc}") from exc
        if self.pixels.shape != (self.rows, self.columns):
            raise UnsupportedPixelFormatError(
                f"{path}: pixel array shape {self.pixels.shape} "
                f"!= ({self.rows}, {self.columns})"
            )

    @property
    def geometry(self):
        return (self.rows, self.columns, self.pixel_spacing)


def _read_slice(path):
    try:
        dataset = pydicom.dcmread(path)
    except (InvalidDicomError, OSError) as exc:
        raise VolumeIOError(f"Can't read DICOM file {path}: {exc}") from exc
    return _Slice(path, dataset)


def _sort_slices(slices):
    """Sort by z position, fall back to instance number"""
    if all(s.z_position is not None for s in slices):
        keys = [s.z_position for s in slices]
    elif all(s.instance_number is not None for s in slices):
        logger.info("ImagePositionPatient missing, ordering by InstanceNumber")
        keys = [s.instance_number for s in slices]
    else:
        raise MissingTagError(IMAGE_POSITION_TAG)
    if len(set(keys)) != len(keys):
        raise InconsistentSeriesError("Duplicate slice positions in series")
    return slice_order(keys)


def _slice_step(slices):
    """Slice step from z positions, or slice thickness"""
    positions = [s.z_position for s in slices]
    if len(slices) < 2 or any(p is None for p in positions):
        return slices[0].slice_thickness
    steps = np.diff(positions)
    step = float(np.mean(steps))
    if np.any(np.abs(steps - step) > SLICE_STEP_TOLERANCE * step):
        raise InconsistentSeriesError(
            f"Irregular slice spacing: steps range from {steps.min()} to {steps.max()}"
        )
    return step


def read_dicom_series(directory_path, threads=1, case_id=None):
    """Read a DICOM series into a CtVolume

    Files lacking the preamble and DICM magic are skipped. Slices are sorted by
    ascending ImagePositionPatient z, or InstanceNumber when positions are
    absent.

    :param Path directory_path: Series directory
    :param int threads: Number of files parsed in parallel
    :param str case_id: Case ID, defaults to the directory name
    """
    directory = Path(directory_path)
    if not directory.is_dir():
        raise VolumeIOError(f"{directory} is not a directory")
    paths = []
    for path in sorted(p for p in directory.iterdir() if p.is_file()):
        if is_dicom_file(path):
            paths.append(path)
        else:
            logger.debug("Skipping non DICOM file %s", path)
    if not paths:
        raise VolumeIOError(f"No DICOM file in {directory}")

    slices = map_ordered(_read_slice, paths, threads)
    geometries = {s.geometry for s in slices}
    if len(geometries) > 1:
        raise InconsistentSeriesError(
            f"Slices disagree on rows, columns or pixel spacing: {sorted(geometries)}"
        )

    order = _sort_slices(slices)
    slices = [slices[i] for i in order]
    row_spacing, col_spacing = slices[0].pixel_spacing
    spacing = (col_spacing, row_spacing, _slice_step(slices))

    voxels = np.stack(
        [rescale_to_hu(s.pixels, s.slope, s.intercept) for s in slices]
    )
    metas = tuple(
        SliceMeta(
            index=i,
            z_position_mm=(
                s.z_position if s.z_position is not None else float(i) * spacing[2]
            ),
            rescale_slope=s.slope,
            rescale_intercept=s.intercept,
        )
        for i, s in enumerate(slices)
    )
    logger.info(
        "Read %d slices from %s, dims %s, spacing %s",
        len(slices),
        directory,
        voxels.shape[::-1],
        spacing,
    )
    return CtVolume(
        voxels,
        spacing,
        case_id=case_id if case_id is not None else directory.name,
        slices=metas,
    )


def slice_order(z_positions):
    """Indices of slices sorted by ascending z position"""
    return tuple(sorted(range(len(z_positions)), key=lambda i: z_positions[i]))
