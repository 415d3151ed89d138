"""Test evaluation metrics"""

import pytest

import numpy as np

from ctpoir.exceptions import (
    DimMismatchError,
    EmptyListError,
    EmptyLungError,
    SingleClassError,
    ZeroGroundTruthError,
    ZeroVarianceError,
)
from ctpoir.mask_ops import BinaryMask3D
from ctpoir.metrics import (
    PairedSeries,
    accuracy_at,
    best_operating_point,
    dice,
    mape,
    mean_dice,
    pearson,
    poir,
    roc_auc,
)
from tests.common import (
    SPACING,
    dice_by_enumeration,
    mann_whitney_auc,
    mape_by_formula,
    pearson_by_formula,
)
from tests.utils import random_pair


class TestDice:
    def test_dice_against_enumeration(self, rng):
        for _ in range(1000):
            a, b = random_pair(rng)
            expected = dice_by_enumeration(a.voxels, b.voxels)
            assert dice(a, b) == pytest.approx(expected, abs=1e-12)
            assert dice(b, a) == dice(a, b)
            assert 0 <= dice(a, b) <= 1

    def test_dice_identity(self, box_lungs):
        assert dice(box_lungs, box_lungs) == 1.0
        empty = BinaryMask3D.empty_like(box_lungs)
        assert dice(box_lungs, empty) == 0.0
        assert dice(empty, empty) == 1.0

    def test_dice_misaligned(self, box_lungs):
        with pytest.raises(DimMismatchError):
            dice(box_lungs, BinaryMask3D(np.zeros((4, 10, 11)), SPACING))

    def test_mean_dice(self, box_lungs):
        empty = BinaryMask3D.empty_like(box_lungs)
        cases = [(box_lungs, box_lungs), (box_lungs, empty)]
        assert mean_dice(cases) == 0.5
        assert mean_dice(iter(cases)) == 0.5
        with pytest.raises(EmptyListError):
            mean_dice([])


class TestPoir:
    def test_poir_voxel_ratio(self, rng):
        for _ in range(100):
            lung, infected = random_pair(rng)
            if lung.is_empty():
                continue
            infected = infected.replace(infected.voxels & lung.voxels)
            assert poir(infected, lung) == pytest.approx(
                infected.count / lung.count, rel=1e-12
            )

    def test_poir_spacing_invariant(self, box_lungs):
        voxels = box_lungs.voxels.copy()
        voxels[:, :, 7:] = False
        infected = BinaryMask3D(voxels, SPACING)
        expected = poir(infected, box_lungs)
        assert expected == 0.5
        for spacing in ((1.0, 1.0, 1.0), (0.3, 0.45, 2.5), (2.0, 2.0, 0.6)):
            assert poir(
                BinaryMask3D(infected.voxels, spacing),
                BinaryMask3D(box_lungs.voxels, spacing),
            ) == pytest.approx(expected, rel=1e-12)

    def test_poir_empty_lung(self, box_lungs):
        empty = BinaryMask3D.empty_like(box_lungs)
        with pytest.raises(EmptyLungError):
            poir(empty, empty)
        assert poir(empty, box_lungs) == 0.0


class TestPearson:
    def test_pearson_against_formula(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 30))
            xs, ys = rng.normal(size=n).tolist(), rng.normal(size=n).tolist()
            series = PairedSeries.from_xy(xs, ys)
            assert pearson(series) == pytest.approx(
                pearson_by_formula(xs, ys), abs=1e-12
            )

    def test_pearson_affine_invariance(self, rng):
        for _ in range(50):
            xs, ys = rng.normal(size=20), rng.normal(size=20)
            r = pearson(PairedSeries.from_xy(xs, ys))
            a, b = rng.uniform(0.5, 5, size=2)
            c, d = rng.uniform(-10, 10, size=2)
            shifted = PairedSeries.from_xy(a * xs + c, b * ys + d)
            assert pearson(shifted) == pytest.approx(r, abs=1e-9)
            flipped = PairedSeries.from_xy(-a * xs + c, b * ys + d)
            assert pearson(flipped) == pytest.approx(-r, abs=1e-9)

    def test_pearson_perfect_correlation(self):
        series = PairedSeries.from_xy([1, 2, 3, 4], [0.1, 0.2, 0.3, 0.4])
        assert pearson(series) == pytest.approx(1.0)

    @pytest.mark.parametrize(
        ("xs", "ys"),
        (
            ([0.3, 0.3, 0.3], [0.1, 0.2, 0.3]),
            ([0.1, 0.2, 0.3], [0.5, 0.5, 0.5]),
            ([0.1], [0.2]),
            ([], []),
        ),
    )
    def test_pearson_zero_variance(self, xs, ys):
        with pytest.raises(ZeroVarianceError):
            pearson(PairedSeries.from_xy(xs, ys))

    def test_paired_series_length_mismatch(self):
        with pytest.raises(ValueError):
            PairedSeries.from_xy([1, 2], [1])


class TestMape:
    def test_mape_against_formula(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 30))
            predicted = rng.uniform(0, 1, size=n).tolist()
            truth = rng.uniform(0.01, 1, size=n).tolist()
            series = PairedSeries.from_xy(predicted, truth)
            assert mape(series) == pytest.approx(
                mape_by_formula(predicted, truth), rel=1e-12
            )

    def test_mape_value(self):
        series = PairedSeries.from_xy([0.11, 0.18], [0.10, 0.20])
        assert mape(series) == pytest.approx(10.0)

    def test_mape_zero_ground_truth(self):
        series = PairedSeries.from_xy([0.1, 0.2, 0.3], [0.1, 0.0, 0.0])
        with pytest.raises(ZeroGroundTruthError) as excinfo:
            mape(series)
        assert excinfo.value.index == 1

    def test_mape_empty(self):
        with pytest.raises(EmptyListError):
            mape(PairedSeries(()))


class TestRoc:
    def test_roc_auc_against_mann_whitney(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 40))
            labels = rng.random(n) < 0.5
            labels[0], labels[1] = True, False
            # Coarse scores to get ties
            scores = np.round(rng.random(n), 1)
            curve = roc_auc(scores, labels)
            expected = mann_whitney_auc(scores.tolist(), labels.tolist())
            assert curve.auc == pytest.approx(expected, abs=1e-9)
            assert curve.points[0] == (0.0, 0.0)
            assert curve.points[-1] == (1.0, 1.0)
            assert len(curve.thresholds) == len(curve.points) - 1
            assert len(curve.thresholds) == len(np.unique(scores))

    def test_roc_auc_known_curve(self):
        curve = roc_auc([0.1, 0.4, 0.35, 0.8], [False, False, True, True])
        assert curve.auc == pytest.approx(0.75)
        assert curve.thresholds == (0.8, 0.4, 0.35, 0.1)
        assert curve.points == (
            (0.0, 0.0),
            (0.0, 0.5),
            (0.5, 0.5),
            (0.5, 1.0),
            (1.0, 1.0),
        )

    def test_roc_auc_separable(self):
        assert roc_auc([0.9, 0.8, 0.2], [True, True, False]).auc == 1.0
        assert roc_auc([0.1, 0.2, 0.8], [True, True, False]).auc == 0.0

    @pytest.mark.parametrize("labels", ([True, True], [False, False]))
    def test_roc_auc_single_class(self, labels):
        with pytest.raises(SingleClassError):
            roc_auc([0.2, 0.7], labels)

    def test_roc_auc_shape_mismatch(self):
        with pytest.raises(ValueError):
            roc_auc([0.2, 0.7, 0.1], [True, False])


class TestOperatingPoint:
    def test_accuracy_at(self):
        scores, labels = [0.1, 0.4, 0.35, 0.8], [False, False, True, True]
        assert accuracy_at(scores, labels, 0.35) == 0.75
        assert accuracy_at(scores, labels, 0.1) == 0.5
        assert accuracy_at(scores, labels, 0.9) == 0.5
        with pytest.raises(EmptyListError):
            accuracy_at([], [], 0.5)

    def test_best_operating_point(self):
        scores, labels = [0.1, 0.4, 0.35, 0.8], [False, False, True, True]
        # 0.35 and 0.8 both reach 0.75, lower threshold wins
        assert best_operating_point(scores, labels) == (0.35, 0.75)

    def test_best_operating_point_is_optimal(self, rng):
        for _ in range(50):
            scores = np.round(rng.random(15), 2)
            labels = rng.random(15) < 0.5
            threshold, accuracy = best_operating_point(scores, labels)
            assert accuracy == accuracy_at(scores, labels, threshold)
            for other in scores:
                assert accuracy_at(scores, labels, other) <= accuracy
