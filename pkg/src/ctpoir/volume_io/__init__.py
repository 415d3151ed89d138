"""Volume input/output"""

from pathlib import Path

from .dicom import read_dicom_series  # noqa
from .internal import make_dir, read_internal, write_internal  # noqa
from .volume import CtVolume, SliceMeta  # noqa


def load_volume(path, threads=1):
    """Load a DICOM series directory or an internal format header file"""
    path = Path(path)
    if path.is_dir():
        return read_dicom_series(path, threads=threads)
    return read_internal(path)
