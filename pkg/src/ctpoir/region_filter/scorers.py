"""Region scorers

A scorer exposes score(candidate) -> probability in [0, 1] and a name used in
report provenance.
"""

import csv
import logging
import math
from pathlib import Path

import marshmallow as ma

import numpy as np

from ctpoir.exceptions import ScorerError, VolumeIOError
from ctpoir.extensions import Schema
from ctpoir.extensions.ma_fields import Probability

logger = logging.getLogger(__name__)

HEURISTIC_PATCH_SIZE = 32


class PatchScorer:
    """Scores each patch, region score is the mean of patch scores"""

    name = None

    def score_patch(self, patch, candidate):
        raise NotImplementedError

    def score(self, candidate):
        scores = [self.score_patch(p, candidate) for p in candidate.patches]
        return math.fsum(scores) / len(scores)


class ConstantScorer(PatchScorer):
    """Same score for every patch"""

    def __init__(self, value):
        if not 0 <= value <= 1:
            raise ValueError(f"Score {value} outside [0, 1]")
        self.value = float(value)
        self.name = f"constant:{self.value}"

    def score_patch(self, patch, candidate):
        return self.value


def pad_patch(array, size=HEURISTIC_PATCH_SIZE):
    """Zero-pad a 2D array, centered, to at least size x size"""
    pad = []
    for extent in array.shape:
        missing = max(size - extent, 0)
        pad.append((missing // 2, missing - missing // 2))
    return np.pad(array, pad)


class HeuristicScorer(PatchScorer):
    """Builtin logistic scorer on fixed patch features

    Features of a patch, zero-padded to 32 x 32:

    - fill: region pixels / padded patch area. This is the fill ratio of the
      fixed scorer input, not of the bbox: a region smaller than 32 x 32 gets a
      lower fill than its bbox fill ratio.
    - std: standard deviation of region gray values / 16
    - mean: (mean of region gray values - 128) / 64
    - size: log10 of region voxel count

    Score is logistic(-3 + 6 fill + std + 0.5 mean + 0.8 size). Thin or small
    structures score low, compact lesion blobs score high.
    """

    name = "builtin-heuristic-v1"

    INTERCEPT = -3.0
    FILL_WEIGHT = 6.0
    STD_WEIGHT = 1.0
    MEAN_WEIGHT = 0.5
    SIZE_WEIGHT = 0.8

    def __init__(self, patch_size=HEURISTIC_PATCH_SIZE):
        self.patch_size = patch_size

    def features(self, patch, candidate):
        mask = pad_patch(patch.mask, self.patch_size)
        values = patch.region_pixels.astype(np.float64)
        return {
            "fill": np.count_nonzero(mask) / mask.size,
            "std": float(values.std()) / 16,
            "mean": (float(values.mean()) - 128) / 64,
            "size": math.log10(candidate.size),
        }

    def score_patch(self, patch, candidate):
        features = self.features(patch, candidate)
        logit = (
            self.INTERCEPT
            + self.FILL_WEIGHT * features["fill"]
            + self.STD_WEIGHT * features["std"]
            + self.MEAN_WEIGHT * features["mean"]
            + self.SIZE_WEIGHT * features["size"]
        )
        return 1 / (1 + math.exp(-logit))


class SidecarScoreSchema(Schema):
    region_id = ma.fields.Integer(
        required=True,
        strict=True,
        validate=ma.validate.Range(min=0),
        metadata={"description": "Region ID, in first-voxel scan order"},
    )
    score = Probability(
        required=True,
        metadata={"description": "Region score"},
    )


class SidecarScorer:
    """Region scores read from a CSV file with columns region_id, score"""

    def __init__(self, scores, name="sidecar"):
        self.scores = dict(scores)
        self.name = name

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        schema = SidecarScoreSchema()
        scores = {}
        try:
            with open(path, newline="", encoding="utf-8") as csv_f:
                reader = csv.DictReader(csv_f)
                if reader.fieldnames is None or set(reader.fieldnames) != {
                    "region_id",
                    "score",
                }:
                    raise VolumeIOError(
                        f"{path}: expected columns region_id,score, "
                        f"got {reader.fieldnames}"
                    )
                for row in reader:
                    try:
                        row = schema.load(
                            {"region_id": int(row["region_id"]), "score": row["score"]}
                        )
                    except (ValueError, ma.ValidationError) as exc:
                        raise VolumeIOError(
                            f"{path}, line {reader.line_num}: {exc}"
                        ) from exc
                    if row["region_id"] in scores:
                        raise VolumeIOError(
                            f"{path}: duplicate region {row['region_id']}"
                        )
                    scores[row["region_id"]] = row["score"]
        except OSError as exc:
            raise VolumeIOError(f"Can't read score file {path}: {exc}") from exc
        logger.info("Read %d region scores from %s", len(scores), path)
        return cls(scores, name=f"sidecar:{path.name}")

    def score(self, candidate):
        try:
            return self.scores[candidate.id]
        except KeyError as exc:
            raise ScorerError(candidate.id, "no score in sidecar file") from exc
