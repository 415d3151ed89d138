"""Contour overlay images"""

import logging
from pathlib import Path

import numpy as np
import scipy.ndimage as ndi

from PIL import Image

from ctpoir.exceptions import VolumeIOError
from ctpoir.preprocess import clip_hu, normalize_to_gray

logger = logging.getLogger(__name__)

LUNG_COLOR = (0, 0, 255)
INFECTED_COLOR = (255, 0, 0)

# 4-connectivity
CROSS = ndi.generate_binary_structure(2, 1)


def contour(mask_slice):
    """Mask pixels with at least one false 4-neighbor

    Pixels outside the image count as false.
    """
    mask_slice = np.asarray(mask_slice, dtype=bool)
    interior = ndi.binary_erosion(mask_slice, structure=CROSS, border_value=0)
    return mask_slice & ~interior


def overlay_slice(gray_slice, lung_slice, infected_slice):
    """RGB image: gray base, lung contour, then infected contour on top"""
    rgb = np.repeat(gray_slice[:, :, np.newaxis], 3, axis=2)
    rgb[contour(lung_slice)] = LUNG_COLOR
    rgb[contour(infected_slice)] = INFECTED_COLOR
    return rgb


def overlay_file_name(slice_index):
    return f"slice_{slice_index:04d}.ppm"


def emit_overlays(volume, lung_mask, infected_mask, out_dir):
    """Write one 8-bit RGB PPM per slice

    Returns the written paths, by slice.
    """
    volume.check_aligned(lung_mask)
    volume.check_aligned(infected_mask)
    gray = normalize_to_gray(clip_hu(volume))
    out_dir = Path(out_dir)
    paths = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for z in range(volume.shape[0]):
            rgb = overlay_slice(
                gray.voxels[z], lung_mask.voxels[z], infected_mask.voxels[z]
            )
            path = out_dir / overlay_file_name(z)
            Image.fromarray(rgb).save(path, format="PPM")
            paths.append(path)
    except OSError as exc:
        raise VolumeIOError(f"Can't write overlays in {out_dir}: {exc}") from exc
    logger.info("Wrote %d overlay images in %s", len(paths), out_dir)
    return paths
