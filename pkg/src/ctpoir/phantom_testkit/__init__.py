"""Synthetic phantoms with exact ground truth"""

from .dicom_writer import write_phantom_dicom  # noqa
from .phantom import (  # noqa
    AirTube,
    BorderBand,
    Ellipsoid,
    Phantom,
    PhantomSpec,
    make_phantom,
)
from .schemas import PhantomSpecSchema, load_phantom_spec  # noqa
