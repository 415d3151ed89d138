"""Global conftest"""

import pytest

import numpy as np

from ctpoir import create_config
from ctpoir.mask_ops import BinaryMask3D
from ctpoir.phantom_testkit import AirTube, PhantomSpec, make_phantom
from ctpoir.volume_io import CtVolume
from tests.common import SMALL_SPEC, SPACING


@pytest.fixture(autouse=True)
def no_settings_file(monkeypatch):
    """Keep user settings files out of the tests"""
    monkeypatch.delenv("CTPOIR_SETTINGS_FILE", raising=False)


@pytest.fixture
def config():
    return create_config()


@pytest.fixture(scope="session")
def default_phantom():
    return make_phantom()


@pytest.fixture(scope="session")
def tube_phantom():
    return make_phantom(PhantomSpec(air_tube=AirTube(), case_id="tube"))


@pytest.fixture(scope="session")
def small_phantom():
    return make_phantom(SMALL_SPEC)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def box_volume():
    """Air around a body slab holding two low HU lungs

    Volume is (nx, ny, nz) = (12, 10, 4). Lungs are x 2..4 and x 7..9, y 3..6,
    on every slice.
    """
    voxels = np.full((4, 10, 12), -1000, dtype=np.int16)
    voxels[:, 1:9, 1:11] = 40
    voxels[:, 3:7, 2:5] = -700
    voxels[:, 3:7, 7:10] = -600
    return CtVolume(voxels, SPACING, case_id="box")


@pytest.fixture
def box_lungs(box_volume):
    voxels = np.zeros(box_volume.shape, dtype=bool)
    voxels[:, 3:7, 2:5] = True
    voxels[:, 3:7, 7:10] = True
    return BinaryMask3D(voxels, box_volume.spacing)
