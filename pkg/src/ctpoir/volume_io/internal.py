"""Internal volume format

A JSON header file plus a sibling .raw payload holding nx * ny * nz
little-endian values, x fastest, then y, then z.
"""

import json
import logging
from pathlib import Path

import marshmallow as ma

import numpy as np

from ctpoir.exceptions import HeaderMismatchError, VolumeIOError

from .schemas import DTYPES, GridHeaderSchema
from .volume import CtVolume

logger = logging.getLogger(__name__)


def raw_path(header_path):
    """Payload file sitting next to header_path"""
    return Path(header_path).with_suffix(".raw")


def make_dir(directory):
    """Create directory and its parents if missing"""
    try:
        Path(directory).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise VolumeIOError(f"Can't create directory {directory}: {exc}") from exc


def write_raw(header_path, array, header):
    """Write header and payload

    :param Path header_path: Header file path
    :param np.ndarray array: Array of shape (nz, ny, nx)
    :param dict header: Header content, dims and byte_order are set here
    """
    header_path = Path(header_path)
    nz, ny, nx = array.shape
    header = {**header, "dims": (nx, ny, nz), "byte_order": "LE"}
    payload = np.ascontiguousarray(array, dtype=DTYPES[header["dtype"]]).tobytes()
    text = json.dumps(GridHeaderSchema().dump(header), indent=2) + "\n"
    try:
        header_path.write_text(text, encoding="utf-8")
        raw_path(header_path).write_bytes(payload)
    except OSError as exc:
        raise VolumeIOError(f"Can't write {header_path}: {exc}") from exc
    logger.debug("Wrote %s (%s, %d bytes)", header_path, header["dtype"], len(payload))


def read_raw(header_path, dtype=None):
    """Read header and payload

    :param Path header_path: Header file path
    :param str dtype: Expected dtype code, checked if given

    Returns (header, array) with array of shape (nz, ny, nx).
    """
    header_path = Path(header_path)
    try:
        text = header_path.read_text(encoding="utf-8")
        payload = raw_path(header_path).read_bytes()
    except OSError as exc:
        raise VolumeIOError(f"Can't read {header_path}: {exc}") from exc
    try:
        header = GridHeaderSchema().load(json.loads(text))
    except (ValueError, ma.ValidationError) as exc:
        raise HeaderMismatchError(f"Invalid header {header_path}: {exc}") from exc
    if dtype is not None and header["dtype"] != dtype:
        raise HeaderMismatchError(
            f"{header_path}: expected dtype {dtype}, got {header['dtype']}"
        )
    nx, ny, nz = header["dims"]
    np_dtype = np.dtype(DTYPES[header["dtype"]])
    expected = nx * ny * nz * np_dtype.itemsize
    if len(payload) != expected:
        raise HeaderMismatchError(
            f"{header_path}: payload has {len(payload)} bytes, "
            f"header declares {nx}x{ny}x{nz} ({expected} bytes)"
        )
    array = np.frombuffer(payload, dtype=np_dtype).reshape(nz, ny, nx)
    return header, array


def write_internal(volume, path):
    """Write a CtVolume in the internal format"""
    write_raw(
        path,
        volume.voxels,
        {"spacing": volume.spacing, "case_id": volume.case_id, "dtype": "i16"},
    )


def read_internal(path):
    """Read a CtVolume from the internal format"""
    header, array = read_raw(path, dtype="i16")
    return CtVolume(
        array.astype(np.int16),
        header["spacing"],
        case_id=header.get("case_id", ""),
    )
