"""Case analysis

Pipeline: preprocess, lung mask, infected mask, region filter, volumes, PoIR.
"""

import dataclasses
import enum
import json
import logging
import typing
from pathlib import Path

import marshmallow as ma

import numpy as np

from ctpoir.exceptions import ConfigError, VolumeIOError
from ctpoir.extensions import catch_stage_error
from ctpoir.mask_ops import intersect, read_mask, volume_mm3
from ctpoir.metrics import poir
from ctpoir.preprocess import clip_hu, normalize_to_gray
from ctpoir.region_filter import (
    FilterConfig,
    HeuristicScorer,
    SidecarScorer,
    extract_candidates,
    filter_regions,
    score_regions,
)
from ctpoir.seg_harness import DEFAULT_TAU, binarize, load_probmaps
from ctpoir.threshold_seg import (
    DEFAULT_INFECTED_THRESHOLD,
    DEFAULT_LUNG_THRESHOLD,
    infected_candidate,
    segment_by_threshold,
)

from .schemas import CaseReportSchema

logger = logging.getLogger(__name__)


class SourceKind(enum.Enum):
    threshold = "threshold"
    probmap = "probmap"
    mask = "mask"


class FilterMode(enum.Enum):
    none = "none"
    builtin = "builtin"
    sidecar = "sidecar"


@dataclasses.dataclass(frozen=True)
class MaskSource:
    """Where a mask comes from

    :param SourceKind kind: HU threshold, probability map file or mask file
    :param int threshold: HU threshold, for threshold sources
    :param Path path: File, for probability map and mask sources
    """

    kind: SourceKind
    threshold: typing.Optional[int] = None
    path: typing.Optional[Path] = None

    def __post_init__(self):
        if self.kind is SourceKind.threshold and self.threshold is None:
            raise ConfigError("Threshold mask source needs a threshold")
        if self.kind is not SourceKind.threshold and self.path is None:
            raise ConfigError(f"{self.kind.value} mask source needs a file")

    @classmethod
    def from_threshold(cls, threshold):
        return cls(SourceKind.threshold, threshold=threshold)

    @classmethod
    def from_probmap(cls, path):
        return cls(SourceKind.probmap, path=Path(path))

    @classmethod
    def from_mask(cls, path):
        return cls(SourceKind.mask, path=Path(path))


@dataclasses.dataclass(frozen=True)
class AnalysisConfig:
    """Analysis parameters

    :param str scores_path: Sidecar score file, for the sidecar filter mode
    """

    lung: MaskSource = MaskSource.from_threshold(DEFAULT_LUNG_THRESHOLD)
    infected: MaskSource = MaskSource.from_threshold(DEFAULT_INFECTED_THRESHOLD)
    filter_mode: FilterMode = FilterMode.builtin
    filter: FilterConfig = FilterConfig()
    scores_path: typing.Optional[Path] = None
    tau: float = DEFAULT_TAU
    fill_lung_holes: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.filter_mode is FilterMode.sidecar and self.scores_path is None:
            raise ConfigError("Sidecar filter mode needs a score file")
        if not 0 <= self.tau <= 1:
            raise ConfigError(f"tau {self.tau} outside [0, 1]")

    @classmethod
    def from_config(cls, config, **overrides):
        """Defaults from the application configuration"""
        kwargs = {
            "lung": MaskSource.from_threshold(config["LUNG_THRESHOLD"]),
            "infected": MaskSource.from_threshold(config["INFECTED_THRESHOLD"]),
            "filter": FilterConfig(
                threshold=config["FILTER_THRESHOLD"],
                min_region_voxels=config["MIN_REGION_VOXELS"],
            ),
            "tau": config["BINARIZE_TAU"],
            "fill_lung_holes": config["FILL_LUNG_HOLES"],
            "threads": config["THREADS"],
        }
        kwargs.update(overrides)
        return cls(**kwargs)


class SliceArea(typing.NamedTuple):
    slice_index: int
    lung_area_mm2: float
    infected_area_mm2: float


@dataclasses.dataclass(frozen=True)
class CaseReport:
    """Quantified report of one case

    :param dict pipeline: Stage parameters and scorer provenance
    """

    case_id: str
    lung_volume_mm3: float
    infected_volume_mm3: float
    poir_fraction: float
    per_slice: tuple
    pipeline: dict

    @property
    def poir_percent(self):
        return self.poir_fraction * 100


@dataclasses.dataclass(frozen=True, eq=False)
class CaseAnalysis:
    """Report with the final masks it was computed from"""

    report: CaseReport
    lung_mask: object
    infected_mask: object


def _load_mask(source, volume, tau):
    if source.kind is SourceKind.probmap:
        mask = binarize(load_probmaps(source.path), tau)
    else:
        mask = read_mask(source.path)
    volume.check_aligned(mask)
    return mask


def _source_record(source, tau, **extra):
    if source.kind is SourceKind.threshold:
        return {"source": source.kind.value, "threshold": source.threshold, **extra}
    record = {"source": source.kind.value, "file": source.path.name}
    if source.kind is SourceKind.probmap:
        record["tau"] = tau
    return record


def _lung_mask(volume, config):
    source = config.lung
    if source.kind is SourceKind.threshold:
        return segment_by_threshold(
            volume, source.threshold, fill_holes=config.fill_lung_holes
        )
    return _load_mask(source, volume, config.tau)


def _infected_mask(volume, lung, config):
    source = config.infected
    if source.kind is SourceKind.threshold:
        return infected_candidate(volume, lung, source.threshold)
    return _load_mask(source, volume, config.tau)


def _filter(infected, gray, config):
    record = {"mode": config.filter_mode.value}
    if config.filter_mode is FilterMode.none:
        return infected, record
    if config.filter_mode is FilterMode.builtin:
        scorer = HeuristicScorer()
    else:
        scorer = SidecarScorer.from_csv(config.scores_path)
    candidates = extract_candidates(infected, gray)
    scored = score_regions(candidates, scorer, threads=config.threads)
    filtered = filter_regions(scored, config.filter, like=infected)
    kept = sum(
        1
        for region in scored
        if region.score >= config.filter.threshold
        and region.size >= config.filter.min_region_voxels
    )
    record.update(
        {
            "scorer": scorer.name,
            "threshold": config.filter.threshold,
            "min_region_voxels": config.filter.min_region_voxels,
            "regions_total": len(scored),
            "regions_kept": kept,
        }
    )
    return filtered, record


def per_slice_areas(lung, infected):
    """(slice index, lung area, infected area) for every slice, in mm²"""
    pixel_area = lung.pixel_area_mm2
    lung_counts = np.count_nonzero(lung.voxels, axis=(1, 2))
    infected_counts = np.count_nonzero(infected.voxels, axis=(1, 2))
    return tuple(
        SliceArea(z, int(n_lung) * pixel_area, int(n_inf) * pixel_area)
        for z, (n_lung, n_inf) in enumerate(zip(lung_counts, infected_counts))
    )


def run_case(volume, config=None):
    """Run the pipeline, return the report and final masks"""
    config = config or AnalysisConfig()
    logger.info("Analyzing case %s", volume.case_id)

    with catch_stage_error("preprocess"):
        clipped = clip_hu(volume)
        gray = normalize_to_gray(clipped)

    with catch_stage_error("lung"):
        lung = _lung_mask(clipped, config)

    with catch_stage_error("infected"):
        infected = _infected_mask(clipped, lung, config)

    with catch_stage_error("filter"):
        infected, filter_record = _filter(infected, gray, config)

    with catch_stage_error("report"):
        # Infected voxels outside the lung don't count
        infected = intersect(infected, lung)
        report = CaseReport(
            case_id=volume.case_id,
            lung_volume_mm3=volume_mm3(lung),
            infected_volume_mm3=volume_mm3(infected),
            poir_fraction=poir(infected, lung),
            per_slice=per_slice_areas(lung, infected),
            pipeline={
                "lung": _source_record(
                    config.lung, config.tau, fill_holes=config.fill_lung_holes
                ),
                "infected": _source_record(config.infected, config.tau),
                "filter": filter_record,
            },
        )
    logger.info("Case %s: PoIR %.4f", report.case_id, report.poir_fraction)
    return CaseAnalysis(report, lung, infected)


def analyze_case(volume, config=None):
    """Compute the quantified PoIR report of a case"""
    return run_case(volume, config).report


def write_report(report, path):
    """Write a report as JSON"""
    text = json.dumps(CaseReportSchema().dump(report), indent=2) + "\n"
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise VolumeIOError(f"Can't write report {path}: {exc}") from exc


def read_report(path):
    """Read a report written by write_report"""
    try:
        data = CaseReportSchema().load(json.loads(Path(path).read_text("utf-8")))
    except OSError as exc:
        raise VolumeIOError(f"Can't read report {path}: {exc}") from exc
    except (ValueError, ma.ValidationError) as exc:
        raise VolumeIOError(f"Invalid report {path}: {exc}") from exc
    data["per_slice"] = tuple(SliceArea(**row) for row in data["per_slice"])
    return CaseReport(**data)
