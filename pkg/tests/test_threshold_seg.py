"""Test HU threshold segmentation"""

import pytest

import numpy as np

from ctpoir.exceptions import OutOfRangeError
from ctpoir.mask_ops import BinaryMask3D, read_mask, subtract
from ctpoir.metrics import dice
from ctpoir.threshold_seg import (
    INFECTED_MASK_FILE,
    LUNG_MASK_FILE,
    SWEEP_THRESHOLDS,
    bootstrap_labels,
    fill_lung_holes,
    infected_by_subtraction,
    infected_by_subtraction_benchmark,
    infected_candidate,
    remove_background,
    segment_by_threshold,
    sweep_lung_threshold,
    sweep_lung_threshold_benchmark,
    threshold_mask,
)
from ctpoir.volume_io import CtVolume
from tests.common import SPACING


def _pockets_volume(sizes):
    """Body slab in air holding one -800 HU pocket per size, along x"""
    width = sum(sizes) + 2 * len(sizes) + 2
    voxels = np.full((1, 5, width), -1000, dtype=np.int16)
    voxels[:, 1:4, 1:-1] = 40
    x = 2
    for size in sizes:
        voxels[0, 2, x : x + size] = -800
        x += size + 2
    return CtVolume(voxels, SPACING)


def _pocket_sizes(mask):
    sizes, run = [], 0
    for value in mask.voxels[0, 2]:
        if value:
            run += 1
        elif run:
            sizes.append(run)
            run = 0
    return sizes


class TestThresholdMask:
    def test_sweep_thresholds(self):
        assert SWEEP_THRESHOLDS[0] == -800
        assert SWEEP_THRESHOLDS[-1] == 0
        assert len(SWEEP_THRESHOLDS) == 17
        assert all(b - a == 50 for a, b in zip(SWEEP_THRESHOLDS, SWEEP_THRESHOLDS[1:]))

    def test_threshold_mask_includes_boundary(self):
        volume = CtVolume(np.array([[[-201, -200, -199]]]), SPACING)
        assert threshold_mask(volume, -200).voxels.ravel().tolist() == [
            True,
            True,
            False,
        ]

    def test_threshold_mask_monotone(self, rng):
        for _ in range(50):
            volume = CtVolume(rng.integers(-1200, 601, size=(3, 6, 6)), SPACING)
            t1, t2 = sorted(rng.integers(-1200, 601, size=2))
            low, high = threshold_mask(volume, t1), threshold_mask(volume, t2)
            assert subtract(low, high).is_empty()


class TestSegmentByThreshold:
    def test_segment_removes_background_air(self, box_volume, box_lungs):
        assert segment_by_threshold(box_volume, -200) == box_lungs

    def test_segment_single_lung(self, box_volume):
        mask = segment_by_threshold(box_volume, -650)
        assert mask.count == 48
        assert mask.voxels[:, 3:7, 2:5].all()

    def test_segment_only_background(self, box_volume):
        assert segment_by_threshold(box_volume, -1000).is_empty()

    @pytest.mark.parametrize(
        ("sizes", "kept"),
        (
            ((6, 4, 6), [6, 6]),
            ((3, 5, 1, 4), [5, 4]),
            # Ties go to the first component in scan order
            ((4, 6, 4), [4, 6]),
            ((2,), [2]),
        ),
    )
    def test_segment_keeps_two_largest(self, sizes, kept):
        mask = segment_by_threshold(_pockets_volume(sizes), -200)
        assert _pocket_sizes(mask) == kept

    def test_remove_background_max_components(self):
        mask = threshold_mask(_pockets_volume((3, 5, 1, 4)), -200)
        assert _pocket_sizes(remove_background(mask, max_components=3)) == [3, 5, 4]

    def test_segment_fill_holes(self, box_volume, box_lungs):
        voxels = box_volume.voxels.copy()
        # Dense voxel enclosed in the first lung on every slice
        voxels[:, 4, 3] = 40
        volume = box_volume.replace(voxels)
        literal = segment_by_threshold(volume, -200)
        assert literal.count == box_lungs.count - 4
        assert segment_by_threshold(volume, -200, fill_holes=True) == box_lungs
        assert fill_lung_holes(literal) == box_lungs

    @pytest.mark.parametrize("threshold", (-1201, 601))
    def test_segment_threshold_out_of_range(self, box_volume, threshold):
        with pytest.raises(OutOfRangeError):
            segment_by_threshold(box_volume, threshold)


class TestInfectedCandidate:
    def test_infected_candidate(self, box_volume, box_lungs):
        infected = infected_candidate(box_volume, box_lungs, -650)
        # Second lung (-600 HU) lies above the threshold
        assert infected.count == 48
        assert infected.voxels[:, 3:7, 7:10].all()

    def test_infected_candidate_inside_lung(self, rng):
        for _ in range(50):
            volume = CtVolume(rng.integers(-1200, 601, size=(3, 6, 6)), SPACING)
            lung = BinaryMask3D(rng.random(volume.shape) < 0.5, SPACING)
            infected = infected_candidate(volume, lung, int(rng.integers(-800, 1)))
            assert subtract(infected, lung).is_empty()


class TestSweep:
    def test_sweep_lung_tie_goes_to_lower_threshold(self, box_volume, box_lungs):
        result = sweep_lung_threshold(box_volume, box_lungs)
        scores = dict(result.entries)
        assert [t for t, _ in result.entries] == list(SWEEP_THRESHOLDS)
        assert scores[-800] == 0.0
        assert scores[-700] == pytest.approx(2 / 3)
        assert all(scores[t] == 1.0 for t in range(-600, 1, 50))
        assert result.best_threshold == -600
        assert result.best_dice == 1.0
        assert result.best_mask == box_lungs

    def test_sweep_infected(self, box_volume, box_lungs):
        gt_infected = BinaryMask3D(np.zeros(box_volume.shape), SPACING)
        voxels = gt_infected.voxels.copy()
        voxels[:, 3:7, 7:10] = True
        gt_infected = gt_infected.replace(voxels)
        result = infected_by_subtraction(box_volume, box_lungs, gt_infected)
        scores = dict(result.entries)
        assert scores[-750] == pytest.approx(2 / 3)
        assert scores[-600] == 0.0
        assert result.best_threshold == -700
        assert result.best_mask == gt_infected

    def test_sweep_benchmark(self, box_volume, box_lungs):
        result = sweep_lung_threshold_benchmark(
            [(box_volume, box_lungs), (box_volume, box_lungs)]
        )
        assert result.best_threshold == -600
        assert len(result.best_masks) == 2
        with pytest.raises(ValueError):
            result.best_mask
        result = infected_by_subtraction_benchmark(
            [(box_volume, box_lungs, box_lungs)]
        )
        # Whole lung is infected below the lowest lung HU
        assert result.best_threshold == -800

    def test_sweep_threads(self, box_volume, box_lungs):
        assert sweep_lung_threshold(
            box_volume, box_lungs, threads=8
        ) == sweep_lung_threshold(box_volume, box_lungs)


class TestPhantomRecovery:
    def test_lung_sweep_finds_designed_optimum(self, default_phantom):
        result = sweep_lung_threshold(default_phantom.volume, default_phantom.gt_lung)
        assert -250 <= result.best_threshold <= -150
        assert result.best_mask == segment_by_threshold(
            default_phantom.volume, result.best_threshold
        )

    def test_bootstrap_lung_dice(self, default_phantom):
        lung, _ = bootstrap_labels(default_phantom.volume)
        assert dice(lung, default_phantom.gt_lung) >= 0.9

    def test_infected_sweep_calibrates_threshold(self, default_phantom):
        lung, _ = bootstrap_labels(default_phantom.volume)
        result = infected_by_subtraction(
            default_phantom.volume, lung, default_phantom.gt_infected
        )
        assert -500 <= result.best_threshold <= -300
        assert result.best_dice >= 0.8
        # Bootstrap at the calibrated threshold recovers lesions
        _, infected = bootstrap_labels(
            default_phantom.volume, t_inf=result.best_threshold
        )
        assert dice(infected, default_phantom.gt_infected) >= 0.7
        assert subtract(infected, lung).is_empty()


class TestBootstrap:
    def test_bootstrap_labels(self, box_volume, box_lungs, tmp_path):
        lung, infected = bootstrap_labels(
            box_volume, t_lung=-200, t_inf=-650, out_dir=tmp_path / "labels"
        )
        assert lung == box_lungs
        assert infected == infected_candidate(box_volume, box_lungs, -650)
        assert read_mask(tmp_path / "labels" / LUNG_MASK_FILE) == lung
        assert read_mask(tmp_path / "labels" / INFECTED_MASK_FILE) == infected

    def test_bootstrap_defaults(self, box_volume, box_lungs, tmp_path):
        lung, infected = bootstrap_labels(box_volume)
        assert lung == box_lungs
        # Both lungs lie above -750 HU
        assert infected == box_lungs
        assert not list(tmp_path.iterdir())
