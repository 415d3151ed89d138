"""Brute force oracles and shared test data"""

import itertools
import math

from ctpoir.phantom_testkit import Ellipsoid, PhantomSpec

SPACING = (0.7, 0.7, 5.0)

# Fits a couple of tiny lungs, fast enough for DICOM and CLI round trips
SMALL_SPEC = PhantomSpec(
    dims=(48, 40, 8),
    spacing=(0.8, 0.8, 2.5),
    seed=7,
    case_id="small",
    body_center=(24.0, 20.0),
    body_radii=(22.0, 18.0),
    lungs=(
        Ellipsoid((14.0, 20.0, 4.0), (6.0, 10.0, 3.0), -650.0, 50.0),
        Ellipsoid((34.0, 20.0, 4.0), (6.0, 10.0, 3.0), -650.0, 50.0),
    ),
    lesions=(Ellipsoid((14.0, 20.0, 4.0), (2.0, 3.0, 1.0), -100.0, 80.0),),
)

NEIGHBORS_26 = [
    offset for offset in itertools.product((-1, 0, 1), repeat=3) if offset != (0, 0, 0)
]


def true_voxels(voxels):
    """Set of (x, y, z) of true voxels, by enumeration"""
    nz, ny, nx = voxels.shape
    return {
        (x, y, z)
        for z in range(nz)
        for y in range(ny)
        for x in range(nx)
        if voxels[z, y, x]
    }


def flood_fill_components(voxels):
    """26-connected components in first-voxel z, y, x scan order

    Returns a list of sets of (x, y, z).
    """
    nz, ny, nx = voxels.shape
    seen = set()
    components = []
    for z in range(nz):
        for y in range(ny):
            for x in range(nx):
                if not voxels[z, y, x] or (x, y, z) in seen:
                    continue
                component = set()
                stack = [(x, y, z)]
                seen.add((x, y, z))
                while stack:
                    cx, cy, cz = stack.pop()
                    component.add((cx, cy, cz))
                    for dz, dy, dx in NEIGHBORS_26:
                        px, py, pz = cx + dx, cy + dy, cz + dz
                        if (
                            0 <= px < nx
                            and 0 <= py < ny
                            and 0 <= pz < nz
                            and voxels[pz, py, px]
                            and (px, py, pz) not in seen
                        ):
                            seen.add((px, py, pz))
                            stack.append((px, py, pz))
                components.append(component)
    return components


def dice_by_enumeration(a, b):
    set_a, set_b = true_voxels(a), true_voxels(b)
    if not set_a and not set_b:
        return 1.0
    return 2 * len(set_a & set_b) / (len(set_a) + len(set_b))


def pearson_by_formula(xs, ys):
    n = len(xs)
    mean_x, mean_y = sum(xs) / n, sum(ys) / n
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = sum((x - mean_x) ** 2 for x in xs)
    var_y = sum((y - mean_y) ** 2 for y in ys)
    return cov / math.sqrt(var_x * var_y)


def mape_by_formula(predicted, truth):
    return 100 * sum(abs(p - t) / abs(t) for p, t in zip(predicted, truth)) / len(truth)


def mann_whitney_auc(scores, labels):
    """Fraction of (positive, negative) pairs ranked correctly, ties count half"""
    positives = [s for s, label in zip(scores, labels) if label]
    negatives = [s for s, label in zip(scores, labels) if not label]
    wins = 0.0
    for p in positives:
        for n in negatives:
            if p > n:
                wins += 1
            elif p == n:
                wins += 0.5
    return wins / (len(positives) * len(negatives))


def contour_by_scan(mask_slice):
    """Mask pixels with a false or out-of-image 4-neighbor"""
    ny, nx = mask_slice.shape
    result = set()
    for y in range(ny):
        for x in range(nx):
            if not mask_slice[y, x]:
                continue
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                px, py = x + dx, y + dy
                if not (0 <= px < nx and 0 <= py < ny) or not mask_slice[py, px]:
                    result.add((x, y))
                    break
    return result
