"""Command line interface"""

import logging
from pathlib import Path

import click

import dotenv

from ctpoir import __version__, create_config, validate_config
from ctpoir.exceptions import CTPoIRError, VolumeIOError
from ctpoir.mask_ops import read_mask, write_mask
from ctpoir.phantom_testkit import load_phantom_spec, make_phantom, write_phantom_dicom
from ctpoir.phantom_testkit.phantom import PhantomSpec
from ctpoir.preprocess import clip_hu, hu_histogram, normalize_to_gray
from ctpoir.region_filter import (
    FilterConfig,
    HeuristicScorer,
    SidecarScorer,
    extract_candidates,
    filter_regions,
    score_regions,
    write_patches,
)
from ctpoir.report import (
    AnalysisConfig,
    FilterMode,
    MaskSource,
    emit_overlays,
    evaluate_benchmark,
    load_benchmark,
    read_classifier_csv,
    run_case,
    write_report,
    write_summary,
)
from ctpoir.seg_harness import ThresholdSegmenter, binarize, load_probmaps, run_25d
from ctpoir.threshold_seg import INFECTED_MASK_FILE, LUNG_MASK_FILE, bootstrap_labels
from ctpoir.volume_io import load_volume, make_dir, read_dicom_series, write_internal

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"
VOLUME_FILE = "volume.json"


class CTPoIRGroup(click.Group):
    """Map CTPoIR errors to their exit code"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except CTPoIRError as exc:
            click.echo(f"Error: {exc}", err=True)
            ctx.exit(exc.exit_code)


def _config(ctx):
    return ctx.find_object(dict)


@click.group(cls=CTPoIRGroup)
@click.option(
    "--config",
    "config_file",
    type=click.Path(dir_okay=False, path_type=Path),
    help="JSON configuration file (upper-case keys).",
)
@click.option("--threads", type=click.IntRange(min=1), help="Worker threads.")
@click.option("--seed", type=click.IntRange(min=0), help="Phantom seed override.")
@click.option(
    "--log-level",
    type=click.Choice(("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")),
    help="Logging level.",
)
@click.version_option(__version__, prog_name="ctpoir")
@click.pass_context
def cli(ctx, config_file, threads, seed, log_level):
    """Proportion of infected lung regions from CT volumes"""
    dotenv.load_dotenv()
    config = create_config(config_file)
    overrides = {"THREADS": threads, "SEED": seed, "LOG_LEVEL": log_level}
    config.update({k: v for k, v in overrides.items() if v is not None})
    validate_config(config)
    logging.basicConfig(level=config["LOG_LEVEL"], format=LOG_FORMAT)
    ctx.obj = config


@cli.command()
@click.argument("series_dir", type=click.Path(file_okay=False, path_type=Path))
@click.argument("out", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--case-id", help="Case ID, defaults to the series directory name.")
@click.pass_context
def convert(ctx, series_dir, out, case_id):
    """Convert a DICOM series to the internal volume format."""
    config = _config(ctx)
    volume = read_dicom_series(series_dir, threads=config["THREADS"], case_id=case_id)
    write_internal(volume, out)
    click.echo(f"{volume.case_id}: {volume.dims} voxels, spacing {volume.spacing}")


@cli.command()
@click.argument("volume_path", type=click.Path(path_type=Path))
@click.option(
    "--out-dir", required=True, type=click.Path(file_okay=False, path_type=Path)
)
@click.option("--t-lung", type=int, help="Lung HU threshold.")
@click.option("--t-inf", type=int, help="Infected HU threshold.")
@click.option(
    "--fill-holes/--no-fill-holes", default=None, help="Fill lung holes per slice."
)
@click.pass_context
def bootstrap(ctx, volume_path, out_dir, t_lung, t_inf, fill_holes):
    """Export initial lung and infected labels from HU thresholds."""
    config = _config(ctx)
    volume = clip_hu(load_volume(volume_path, threads=config["THREADS"]))
    lung, infected = bootstrap_labels(
        volume,
        t_lung=config["LUNG_THRESHOLD"] if t_lung is None else t_lung,
        t_inf=config["INFECTED_THRESHOLD"] if t_inf is None else t_inf,
        fill_holes=config["FILL_LUNG_HOLES"] if fill_holes is None else fill_holes,
        out_dir=out_dir,
    )
    click.echo(f"lung: {lung.count} voxels, infected: {infected.count} voxels")


@cli.command()
@click.argument("volume_path", type=click.Path(path_type=Path))
@click.option(
    "--probmaps",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Probability map file from an external segmenter.",
)
@click.option(
    "--builtin-threshold", type=int, help="Run the builtin HU threshold segmenter."
)
@click.option("--tau", type=click.FloatRange(0, 1), help="Binarization threshold.")
@click.option(
    "--out", required=True, type=click.Path(dir_okay=False, path_type=Path)
)
@click.pass_context
def segment(ctx, volume_path, probmaps, builtin_threshold, tau, out):
    """Segment a volume through the 2.5D harness."""
    if (probmaps is None) == (builtin_threshold is None):
        raise click.UsageError("Give exactly one of --probmaps, --builtin-threshold")
    config = _config(ctx)
    volume = load_volume(volume_path, threads=config["THREADS"])
    tau = config["BINARIZE_TAU"] if tau is None else tau
    if probmaps is not None:
        probmap = load_probmaps(probmaps)
        volume.check_aligned(probmap)
    else:
        clipped = clip_hu(volume)
        segmenter = ThresholdSegmenter(
            clipped, builtin_threshold, fill_holes=config["FILL_LUNG_HOLES"]
        )
        probmap = run_25d(
            normalize_to_gray(clipped), segmenter, threads=config["THREADS"]
        )
    mask = binarize(probmap, tau)
    write_mask(mask, out)
    click.echo(f"{mask.count} voxels")


def _gray_and_mask(ctx, mask_path, volume_path):
    config = _config(ctx)
    volume = load_volume(volume_path, threads=config["THREADS"])
    mask = read_mask(mask_path)
    volume.check_aligned(mask)
    return normalize_to_gray(clip_hu(volume)), mask


@cli.command()
@click.argument("mask_path", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("volume_path", type=click.Path(path_type=Path))
@click.option(
    "--out-dir", required=True, type=click.Path(file_okay=False, path_type=Path)
)
@click.pass_context
def patches(ctx, mask_path, volume_path, out_dir):
    """Export region patches as 8-bit PGM images."""
    gray, mask = _gray_and_mask(ctx, mask_path, volume_path)
    candidates = extract_candidates(mask, gray)
    write_patches(candidates, out_dir)
    count = sum(len(c.patches) for c in candidates)
    click.echo(f"{len(candidates)} regions, {count} patches")


@cli.command(name="filter")
@click.argument("mask_path", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("volume_path", type=click.Path(path_type=Path))
@click.option(
    "--scores",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Sidecar score file (region_id,score).",
)
@click.option("--builtin", is_flag=True, help="Use the builtin heuristic scorer.")
@click.option("--threshold", type=click.FloatRange(0, 1), help="Keep threshold.")
@click.option(
    "--min-region-voxels", type=click.IntRange(min=1), help="Minimum region size."
)
@click.option(
    "--out", required=True, type=click.Path(dir_okay=False, path_type=Path)
)
@click.pass_context
def filter_command(
    ctx, mask_path, volume_path, scores, builtin, threshold, min_region_voxels, out
):
    """Remove regions scoring below the threshold."""
    if (scores is None) == (not builtin):
        raise click.UsageError("Give exactly one of --scores, --builtin")
    config = _config(ctx)
    gray, mask = _gray_and_mask(ctx, mask_path, volume_path)
    scorer = HeuristicScorer() if builtin else SidecarScorer.from_csv(scores)
    filter_config = FilterConfig(
        threshold=config["FILTER_THRESHOLD"] if threshold is None else threshold,
        min_region_voxels=(
            config["MIN_REGION_VOXELS"]
            if min_region_voxels is None
            else min_region_voxels
        ),
    )
    scored = score_regions(
        extract_candidates(mask, gray), scorer, threads=config["THREADS"]
    )
    filtered = filter_regions(scored, filter_config, like=mask)
    write_mask(filtered, out)
    click.echo(f"{filtered.count} of {mask.count} voxels kept")


def _mask_source(threshold, probmap, mask, default):
    given = [v for v in (threshold, probmap, mask) if v is not None]
    if len(given) > 1:
        raise click.UsageError("Give at most one source per structure")
    if probmap is not None:
        return MaskSource.from_probmap(probmap)
    if mask is not None:
        return MaskSource.from_mask(mask)
    if threshold is not None:
        return MaskSource.from_threshold(threshold)
    return default


def _source_options(structure):
    file_type = click.Path(dir_okay=False, path_type=Path)

    def decorator(func):
        for option in reversed(
            (
                click.option(f"--{structure}-threshold", type=int),
                click.option(f"--{structure}-probmap", type=file_type),
                click.option(f"--{structure}-mask", type=file_type),
            )
        ):
            func = option(func)
        return func

    return decorator


@cli.command()
@click.argument("volume_path", type=click.Path(path_type=Path))
@click.option(
    "--out", required=True, type=click.Path(dir_okay=False, path_type=Path)
)
@_source_options("lung")
@_source_options("infected")
@click.option(
    "--filter",
    "filter_mode",
    type=click.Choice([m.value for m in FilterMode]),
    help="Region filter mode, builtin by default.",
)
@click.option(
    "--scores",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Sidecar score file, implies --filter sidecar.",
)
@click.option("--filter-threshold", type=click.FloatRange(0, 1))
@click.option("--tau", type=click.FloatRange(0, 1))
@click.option(
    "--masks-dir",
    type=click.Path(file_okay=False, path_type=Path),
    help="Also write the final lung and infected masks.",
)
@click.option(
    "--histogram",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Also write the HU histogram of the lung as CSV.",
)
@click.pass_context
def analyze(ctx, volume_path, out, **options):
    """Compute the PoIR report of a case."""
    config = _config(ctx)
    volume = load_volume(volume_path, threads=config["THREADS"])
    defaults = AnalysisConfig.from_config(config)
    filter_mode = options["filter_mode"]
    if options["scores"] is not None:
        if filter_mode not in (None, FilterMode.sidecar.value):
            raise click.UsageError("--scores needs the sidecar filter mode")
        filter_mode = FilterMode.sidecar.value
    overrides = {
        "lung": _mask_source(
            options["lung_threshold"],
            options["lung_probmap"],
            options["lung_mask"],
            defaults.lung,
        ),
        "infected": _mask_source(
            options["infected_threshold"],
            options["infected_probmap"],
            options["infected_mask"],
            defaults.infected,
        ),
        "scores_path": options["scores"],
    }
    if filter_mode is not None:
        overrides["filter_mode"] = FilterMode(filter_mode)
    if options["filter_threshold"] is not None:
        overrides["filter"] = FilterConfig(
            threshold=options["filter_threshold"],
            min_region_voxels=defaults.filter.min_region_voxels,
        )
    if options["tau"] is not None:
        overrides["tau"] = options["tau"]
    analysis = run_case(volume, AnalysisConfig.from_config(config, **overrides))

    write_report(analysis.report, out)
    if options["masks_dir"] is not None:
        masks_dir = options["masks_dir"]
        make_dir(masks_dir)
        write_mask(analysis.lung_mask, masks_dir / LUNG_MASK_FILE)
        write_mask(analysis.infected_mask, masks_dir / INFECTED_MASK_FILE)
    if options["histogram"] is not None:
        histogram = hu_histogram(
            volume, analysis.lung_mask, config["HISTOGRAM_BIN_WIDTH"]
        )
        try:
            with open(options["histogram"], "w", newline="", encoding="utf-8") as csv_f:
                histogram.write_csv(csv_f)
        except OSError as exc:
            raise VolumeIOError(
                f"Can't write histogram {options['histogram']}: {exc}"
            ) from exc
    click.echo(f"{analysis.report.case_id}: PoIR {analysis.report.poir_percent:.2f}%")


@cli.command()
@click.option(
    "--pred-dir", required=True, type=click.Path(file_okay=False, path_type=Path)
)
@click.option(
    "--gt-dir", required=True, type=click.Path(file_okay=False, path_type=Path)
)
@click.option(
    "--out", required=True, type=click.Path(dir_okay=False, path_type=Path)
)
@click.option("--method", help="Method giving predicted PoIR.")
@click.option(
    "--classifier",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Region classifier outputs, CSV with columns score,label.",
)
@click.pass_context
def evaluate(ctx, pred_dir, gt_dir, out, method, classifier):
    """Summarize m-Dice, Pearson's r and mAPE over a benchmark."""
    config = _config(ctx)
    cases = load_benchmark(gt_dir, pred_dir)
    summary = evaluate_benchmark(
        cases,
        poir_method=method,
        classifier=read_classifier_csv(classifier) if classifier else None,
        threads=config["THREADS"],
    )
    write_summary(summary, out)
    for row in summary.rows:
        click.echo(f"{row.method:30} {row.structure:16} {row.m_dice:.3f}")
    if summary.pearson_r is not None:
        click.echo(f"Pearson r {summary.pearson_r:.3f}")
    if summary.mape_percent is not None:
        click.echo(f"mAPE {summary.mape_percent:.1f}%")


@cli.command()
@click.argument("volume_path", type=click.Path(path_type=Path))
@click.option(
    "--lung", required=True, type=click.Path(dir_okay=False, path_type=Path)
)
@click.option(
    "--infected", required=True, type=click.Path(dir_okay=False, path_type=Path)
)
@click.option(
    "--out-dir", required=True, type=click.Path(file_okay=False, path_type=Path)
)
@click.pass_context
def overlay(ctx, volume_path, lung, infected, out_dir):
    """Write contour overlays, one PPM per slice."""
    config = _config(ctx)
    volume = load_volume(volume_path, threads=config["THREADS"])
    paths = emit_overlays(volume, read_mask(lung), read_mask(infected), out_dir)
    click.echo(f"{len(paths)} images")


@cli.command()
@click.option(
    "--spec",
    "spec_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Phantom spec JSON, default phantom if omitted.",
)
@click.option(
    "--out-dir", required=True, type=click.Path(file_okay=False, path_type=Path)
)
@click.option("--dicom", is_flag=True, help="Also write a DICOM series.")
@click.option("--shuffle", is_flag=True, help="Shuffle DICOM file names.")
@click.pass_context
def phantom(ctx, spec_path, out_dir, dicom, shuffle):
    """Generate a synthetic phantom with ground truth masks."""
    config = _config(ctx)
    spec = load_phantom_spec(spec_path) if spec_path else PhantomSpec()
    if config["SEED"] is not None:
        spec = spec.replace(seed=config["SEED"])
    generated = make_phantom(spec)
    make_dir(out_dir)
    write_internal(generated.volume, out_dir / VOLUME_FILE)
    write_mask(generated.gt_lung, out_dir / LUNG_MASK_FILE)
    write_mask(generated.gt_infected, out_dir / INFECTED_MASK_FILE)
    for name, mask in generated.decoys.items():
        write_mask(mask, out_dir / f"decoy_{name}.json")
    if dicom:
        write_phantom_dicom(
            generated, out_dir / "dicom", shuffle=shuffle, seed=spec.seed
        )
    click.echo(f"{spec.case_id}: PoIR {generated.poir * 100:.2f}%")

