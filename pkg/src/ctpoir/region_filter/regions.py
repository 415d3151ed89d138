"""Candidate regions, patches and filtering"""

import dataclasses
import logging
from pathlib import Path

import numpy as np

from PIL import Image

from ctpoir.exceptions import ConfigError, ScorerError, VolumeIOError
from ctpoir.extensions import map_ordered
from ctpoir.mask_ops import BinaryMask3D, connected_components, min_square_bbox

logger = logging.getLogger(__name__)

DEFAULT_FILTER_THRESHOLD = 0.45


@dataclasses.dataclass(frozen=True)
class FilterConfig:
    """Region filter parameters

    :param float threshold: Keep regions scoring >= threshold
    :param int min_region_voxels: Keep regions with at least as many voxels
    """

    threshold: float = DEFAULT_FILTER_THRESHOLD
    min_region_voxels: int = 1

    def __post_init__(self):
        if not 0 <= self.threshold <= 1:
            raise ConfigError(f"Filter threshold {self.threshold} outside [0, 1]")
        if self.min_region_voxels < 1:
            raise ConfigError("Minimum region size must be at least 1 voxel")


@dataclasses.dataclass(frozen=True, eq=False)
class Patch:
    """Square crop of one region on one slice

    :param int slice_index: Slice z
    :param SquareBox box: Square bounding box
    :param np.ndarray pixels: Gray pixels, (side, side) uint8
    :param np.ndarray mask: Region pixels within the crop, (side, side) bool
    """

    slice_index: int
    box: tuple
    pixels: np.ndarray
    mask: np.ndarray

    @property
    def region_pixels(self):
        """Gray values of region pixels"""
        return self.pixels[self.mask]


@dataclasses.dataclass(frozen=True, eq=False)
class ScoredRegion:
    """Candidate region with its patches, scored or not"""

    region: object
    patches: tuple
    spacing: tuple
    score: float = None

    @property
    def id(self):
        return self.region.id

    @property
    def size(self):
        return self.region.size

    def with_score(self, score):
        return dataclasses.replace(
            self, region=self.region.with_score(score), score=score
        )


def _region_patch(region, gray_slice, slice_index):
    box = min_square_bbox(region, slice_index)
    plane = np.zeros(gray_slice.shape, dtype=bool)
    x, y = region.pixels_on_slice(slice_index).T
    plane[y, x] = True
    return Patch(slice_index, box, box.crop(gray_slice).copy(), box.crop(plane))


def extract_candidates(infected_mask, gray):
    """One candidate per connected component, one patch per slice it touches"""
    infected_mask.check_aligned(gray)
    candidates = []
    for region in connected_components(infected_mask):
        patches = tuple(
            _region_patch(region, gray.voxels[z], z) for z in region.slice_indices
        )
        candidates.append(ScoredRegion(region, patches, infected_mask.spacing))
    logger.info("Extracted %d candidate regions", len(candidates))
    return candidates


def _score_one(scorer, candidate):
    try:
        score = float(scorer.score(candidate))
    except ScorerError:
        raise
    except Exception as exc:
        raise ScorerError(candidate.id, str(exc)) from exc
    if not 0 <= score <= 1:
        raise ScorerError(candidate.id, f"score {score} outside [0, 1]")
    return candidate.with_score(score)


def score_regions(candidates, scorer, threads=1):
    """Set the score of every candidate

    :param list candidates: Candidates from extract_candidates
    :param scorer: Object with a score(candidate) method returning [0, 1]
    :param int threads: Number of regions scored concurrently
    """
    scored = map_ordered(lambda c: _score_one(scorer, c), candidates, threads)
    for region in scored:
        logger.debug(
            "Region %d (%d voxels): %.4f", region.id, region.size, region.score
        )
    return scored


def filter_regions(scored, config=None, like=None):
    """Union of regions passing the filter

    A region is kept when score >= threshold and size >= min_region_voxels.

    :param list scored: Scored regions
    :param FilterConfig config: Filter parameters
    :param VoxelGrid like: Grid giving dims and spacing, needed if scored is empty
    """
    config = config or FilterConfig()
    if like is not None:
        mask = BinaryMask3D.empty_like(like)
    elif scored:
        nx, ny, nz = scored[0].region.dims
        mask = BinaryMask3D(np.zeros((nz, ny, nx), dtype=bool), scored[0].spacing)
    else:
        raise ValueError("No region and no template grid")
    voxels = mask.voxels.copy()
    kept = 0
    for candidate in scored:
        if candidate.score is None:
            raise ScorerError(candidate.id, "region not scored")
        if (
            candidate.score >= config.threshold
            and candidate.size >= config.min_region_voxels
        ):
            x, y, z = candidate.region.coords.T
            voxels[z, y, x] = True
            kept += 1
    logger.info(
        "Kept %d of %d regions (threshold %s)", kept, len(scored), config.threshold
    )
    return mask.replace(voxels)


def patch_file_name(region_id, slice_index):
    return f"region_{region_id}_z{slice_index}.pgm"


def write_patches(candidates, out_dir):
    """Write one 8-bit PGM per (region, slice)"""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for candidate in candidates:
            for patch in candidate.patches:
                path = out_dir / patch_file_name(candidate.id, patch.slice_index)
                Image.fromarray(patch.pixels).save(path, format="PPM")
    except OSError as exc:
        raise VolumeIOError(f"Can't write patches in {out_dir}: {exc}") from exc
