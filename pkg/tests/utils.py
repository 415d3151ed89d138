"""Test utils"""

import numpy as np

from ctpoir.mask_ops import BinaryMask3D
from tests.common import SPACING


def random_mask(rng, max_dims=(16, 16, 8), density=None, spacing=SPACING):
    """Random mask with random dims up to max_dims (nx, ny, nz)

    :param np.random.Generator rng: Random generator
    :param float density: Probability of a true voxel, random if None
    """
    nx, ny, nz = (int(rng.integers(1, d + 1)) for d in max_dims)
    if density is None:
        density = rng.uniform(0.05, 0.6)
    return BinaryMask3D(rng.random((nz, ny, nx)) < density, spacing)


def random_pair(rng, max_dims=(16, 16, 8)):
    """Two random masks on the same grid"""
    a = random_mask(rng, max_dims)
    b = BinaryMask3D(rng.random(a.shape) < rng.uniform(0.05, 0.6), a.spacing)
    return a, b


def mask_from_voxels(shape, voxels, spacing=SPACING):
    """Mask of shape (nz, ny, nx) with the given (x, y, z) voxels set"""
    array = np.zeros(shape, dtype=bool)
    for x, y, z in voxels:
        array[z, y, x] = True
    return BinaryMask3D(array, spacing)
