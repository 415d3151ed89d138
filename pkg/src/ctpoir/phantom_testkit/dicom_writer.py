"""Minimal uncompressed DICOM series writer"""

import logging
from pathlib import Path

import numpy as np

from pydicom.dataset import FileDataset, FileMetaDataset
from pydicom.uid import CTImageStorage, ExplicitVRLittleEndian, generate_uid

from ctpoir.exceptions import VolumeIOError
from ctpoir.volume_io.dicom import PREAMBLE_LENGTH, rescale_to_hu

logger = logging.getLogger(__name__)

DEFAULT_SLOPE = 1.0
DEFAULT_INTERCEPT = -1024.0
# Little endian, by pixel representation
PIXEL_DTYPES = {0: "<u2", 1: "<i2"}


def _ds(value):
    """Decimal string representation fitting 16 characters"""
    return f"{value:.10g}"


def stored_values(hu, slope, intercept):
    """Stored values such that stored * slope + intercept == hu

    Returns (stored array, pixel representation).
    """
    stored = np.rint((hu.astype(np.float64) - intercept) / slope)
    if not np.array_equal(rescale_to_hu(stored, slope, intercept), hu):
        raise VolumeIOError(
            f"HU values not representable with slope {slope}, intercept {intercept}"
        )
    if stored.min() >= 0 and stored.max() <= np.iinfo(np.uint16).max:
        return stored.astype(np.uint16), 0
    info = np.iinfo(np.int16)
    if stored.min() < info.min or stored.max() > info.max:
        raise VolumeIOError("Stored values exceed 16 bits")
    return stored.astype(np.int16), 1


def _slice_dataset(path, volume, index, uids, pixels, representation, rescale):
    slope, intercept = rescale
    sx, sy, sz = volume.spacing
    meta = FileMetaDataset()
    meta.MediaStorageSOPClassUID = CTImageStorage
    meta.MediaStorageSOPInstanceUID = uids["instances"][index]
    meta.TransferSyntaxUID = ExplicitVRLittleEndian

    ds = FileDataset(str(path), {}, file_meta=meta, preamble=b"\0" * PREAMBLE_LENGTH)
    ds.SOPClassUID = CTImageStorage
    ds.SOPInstanceUID = uids["instances"][index]
    ds.StudyInstanceUID = uids["study"]
    ds.SeriesInstanceUID = uids["series"]
    ds.Modality = "CT"
    ds.PatientID = volume.case_id
    ds.InstanceNumber = index + 1
    ds.ImagePositionPatient = [_ds(0.0), _ds(0.0), _ds(index * sz)]
    ds.ImageOrientationPatient = ["1", "0", "0", "0", "1", "0"]
    ds.SliceThickness = _ds(sz)
    # Row spacing first
    ds.PixelSpacing = [_ds(sy), _ds(sx)]
    ds.Rows, ds.Columns = pixels.shape
    ds.SamplesPerPixel = 1
    ds.PhotometricInterpretation = "MONOCHROME2"
    ds.BitsAllocated = 16
    ds.BitsStored = 16
    ds.HighBit = 15
    ds.PixelRepresentation = representation
    ds.RescaleSlope = _ds(slope)
    ds.RescaleIntercept = _ds(intercept)
    ds.PixelData = pixels.astype(PIXEL_DTYPES[representation]).tobytes()
    return ds


def write_phantom_dicom(
    phantom,
    directory,
    slope=DEFAULT_SLOPE,
    intercept=DEFAULT_INTERCEPT,
    shuffle=False,
    seed=0,
):
    """Write a volume as a DICOM series, one file per slice

    :param phantom: Phantom or CtVolume
    :param Path directory: Output directory, created if needed
    :param float slope: Rescale slope
    :param float intercept: Rescale intercept
    :param bool shuffle: Name files in a random order unrelated to z
    :param int seed: Seed of the file name shuffle
    """
    volume = getattr(phantom, "volume", phantom)
    directory = Path(directory)
    stored, representation = stored_values(volume.voxels, slope, intercept)
    nz = volume.shape[0]
    numbers = np.arange(nz)
    if shuffle:
        numbers = np.random.Generator(np.random.PCG64(seed)).permutation(nz)
    entropy = [volume.case_id, str(volume.dims), str(volume.spacing)]
    uids = {
        "study": generate_uid(entropy_srcs=[*entropy, "study"]),
        "series": generate_uid(entropy_srcs=[*entropy, "series"]),
        "instances": [
            generate_uid(entropy_srcs=[*entropy, f"slice {z}"]) for z in range(nz)
        ],
    }
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for z in range(nz):
            path = directory / f"IM{int(numbers[z]):05d}.dcm"
            ds = _slice_dataset(
                path,
                volume,
                z,
                uids,
                stored[z],
                representation,
                (slope, intercept),
            )
            ds.save_as(path, enforce_file_format=True)
    except OSError as exc:
        raise VolumeIOError(f"Can't write DICOM series in {directory}: {exc}") from exc
    logger.info("Wrote %d DICOM slices in %s", nz, directory)

