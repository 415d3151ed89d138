"""Test mask operations"""

import pytest

import numpy as np

from ctpoir.exceptions import (
    DimMismatchError,
    EmptyIntersectionError,
    HeaderMismatchError,
)
from ctpoir.mask_ops import (
    BinaryMask3D,
    connected_components,
    intersect,
    label_components,
    min_square_bbox,
    read_mask,
    subtract,
    union,
    volume_mm3,
    write_mask,
)
from ctpoir.volume_io.internal import raw_path
from tests.common import SPACING, flood_fill_components, true_voxels
from tests.utils import mask_from_voxels, random_mask, random_pair


class TestMaskAlgebra:
    def test_mask_algebra_against_enumeration(self, rng):
        for _ in range(1000):
            a, b = random_pair(rng)
            set_a, set_b = true_voxels(a.voxels), true_voxels(b.voxels)
            assert true_voxels(subtract(a, b).voxels) == set_a - set_b
            assert true_voxels(intersect(a, b).voxels) == set_a & set_b
            assert true_voxels(union(a, b).voxels) == set_a | set_b
            assert union(subtract(a, b), intersect(a, b)) == a
            assert volume_mm3(a) == pytest.approx(len(set_a) * 0.7 * 0.7 * 5.0)

    def test_volume_additive_over_disjoint_masks(self, rng):
        for _ in range(100):
            a, b = random_pair(rng)
            b = subtract(b, a)
            assert volume_mm3(union(a, b)) == pytest.approx(
                volume_mm3(a) + volume_mm3(b)
            )

    def test_mask_algebra_misaligned(self):
        a = BinaryMask3D(np.zeros((2, 2, 2)), SPACING)
        with pytest.raises(DimMismatchError):
            subtract(a, BinaryMask3D(np.zeros((2, 2, 3)), SPACING))
        with pytest.raises(DimMismatchError):
            intersect(a, BinaryMask3D(np.zeros((2, 2, 2)), (1, 1, 1)))

    def test_mask_count(self):
        mask = BinaryMask3D(np.zeros((2, 3, 4)), SPACING)
        assert mask.count == 0
        assert mask.is_empty()
        full = BinaryMask3D.full_like(mask)
        assert full.count == 24
        assert not full.is_empty()
        assert BinaryMask3D.empty_like(full) == mask


class TestConnectedComponents:
    def test_components_against_flood_fill(self, rng):
        for _ in range(1000):
            mask = random_mask(rng)
            expected = flood_fill_components(mask.voxels)
            regions = connected_components(mask)
            assert [r.id for r in regions] == list(range(len(expected)))
            assert [r.voxel_ids for r in regions] == expected
            assert all(r.dims == mask.dims for r in regions)

    def test_components_partition_mask(self, rng):
        for _ in range(50):
            mask = random_mask(rng)
            regions = connected_components(mask)
            assert sum(r.size for r in regions) == mask.count
            covered = set().union(*(r.voxel_ids for r in regions))
            assert covered == true_voxels(mask.voxels)

    def test_components_diagonal_neighbors(self):
        # Corner-touching voxels are 26-connected
        mask = mask_from_voxels((3, 3, 3), [(0, 0, 0), (1, 1, 1), (2, 2, 2)])
        regions = connected_components(mask)
        assert len(regions) == 1
        assert regions[0].size == 3
        assert regions[0].slice_extent == (0, 2)
        assert regions[0].slice_indices == (0, 1, 2)

    def test_components_ids_in_scan_order(self):
        # Region starting at z=0 comes first even though it is listed last
        mask = mask_from_voxels((2, 1, 5), [(4, 0, 1), (0, 0, 0), (0, 0, 1)])
        labels, count = label_components(mask)
        assert count == 2
        assert labels[0, 0, 0] == 1
        assert labels[1, 0, 4] == 2
        regions = connected_components(mask)
        assert regions[0].voxel_ids == {(0, 0, 0), (0, 0, 1)}
        assert regions[1].voxel_ids == {(4, 0, 1)}

    def test_components_empty(self):
        mask = BinaryMask3D(np.zeros((2, 2, 2)), SPACING)
        assert connected_components(mask) == []
        assert label_components(mask)[1] == 0

    def test_region_to_mask(self, rng):
        mask = random_mask(rng, density=0.3)
        regions = connected_components(mask)
        rebuilt = BinaryMask3D.empty_like(mask)
        for region in regions:
            rebuilt = union(rebuilt, region.to_mask(mask.spacing))
        assert rebuilt == mask


class TestMinSquareBbox:
    def test_bbox_contains_region_pixels(self, rng):
        for _ in range(300):
            mask = random_mask(rng, max_dims=(16, 16, 3), density=0.2)
            for region in connected_components(mask):
                for z in region.slice_indices:
                    box = min_square_bbox(region, z)
                    pixels = region.pixels_on_slice(z)
                    x_extent = np.ptp(pixels[:, 0]) + 1
                    y_extent = np.ptp(pixels[:, 1]) + 1
                    assert box.side == max(x_extent, y_extent)
                    nx, ny, _ = region.dims
                    if box.side <= min(nx, ny):
                        assert 0 <= box.x0 and box.x0 + box.side <= nx
                        assert 0 <= box.y0 and box.y0 + box.side <= ny
                        assert np.all(pixels[:, 0] >= box.x0)
                        assert np.all(pixels[:, 0] < box.x0 + box.side)
                        assert np.all(pixels[:, 1] >= box.y0)
                        assert np.all(pixels[:, 1] < box.y0 + box.side)

    def test_bbox_centered_on_rectangle(self):
        # Rectangle x 4..7, y 5..5: square of side 4 centered on it
        mask = mask_from_voxels((1, 12, 12), [(x, 5, 0) for x in range(4, 8)])
        (region,) = connected_components(mask)
        box = min_square_bbox(region, 0)
        assert box.side == 4
        assert (box.cx, box.cy) == (5.5, 5.5)
        assert (box.x0, box.y0) == (4, 4)
        assert region.bbox_square(0) == box

    def test_bbox_shifted_inside_image(self):
        # Thin vertical bar on the top-left border
        mask = mask_from_voxels((1, 10, 10), [(0, y, 0) for y in range(5)])
        (region,) = connected_components(mask)
        box = min_square_bbox(region, 0)
        assert box.side == 5
        assert (box.x0, box.y0) == (0, 0)
        image = np.arange(100).reshape(10, 10)
        assert box.crop(image).shape == (5, 5)

    def test_bbox_empty_intersection(self):
        mask = mask_from_voxels((3, 4, 4), [(1, 1, 0)])
        (region,) = connected_components(mask)
        with pytest.raises(EmptyIntersectionError):
            min_square_bbox(region, 2)


class TestMaskFile:
    def test_mask_file_round_trip(self, tmp_path, rng):
        for _ in range(10):
            mask = random_mask(rng)
            write_mask(mask, tmp_path / "mask.json")
            assert read_mask(tmp_path / "mask.json") == mask

    def test_mask_file_values(self, tmp_path, box_lungs):
        path = tmp_path / "mask.json"
        write_mask(box_lungs, path)
        payload = np.frombuffer(raw_path(path).read_bytes(), dtype=np.uint8)
        assert set(payload.tolist()) == {0, 1}
        payload = payload.copy()
        payload[0] = 2
        raw_path(path).write_bytes(payload.tobytes())
        with pytest.raises(HeaderMismatchError):
            read_mask(path)
