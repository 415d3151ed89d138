"""Synthetic CT phantom

An elliptic cylinder body holding two ellipsoid lungs with lesion blobs, in
exterior air. Ground truth masks are the exact ellipsoid voxel sets.

Noise comes from numpy's PCG64 generator seeded with the spec seed: one
standard normal draw per voxel, in (z, y, x) C order, shared by every
structure. HU values are rounded half away from zero.

Optional decoys:

- border band: a shell just outside each lung whose HU ramps linearly, without
  noise, from a low value at the lung surface up to body HU
- air tube: a thin bright-walled tube with an air lumen, running along z inside
  a lung; it belongs to the lung but not to the infected regions
"""

import dataclasses
import logging

import numpy as np

from ctpoir.exceptions import SpecViolationError
from ctpoir.mask_ops import BinaryMask3D
from ctpoir.metrics import poir
from ctpoir.volume_io.volume import CtVolume, to_hu_int16

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Ellipsoid:
    """Ellipsoid in voxel coordinates, with its HU distribution"""

    center: tuple
    radii: tuple
    hu_mean: float
    hu_sigma: float

    def distance(self, x, y, z):
        """Normalized distance, <= 1 inside"""
        cx, cy, cz = self.center
        rx, ry, rz = self.radii
        return np.sqrt(
            ((x - cx) / rx) ** 2 + ((y - cy) / ry) ** 2 + ((z - cz) / rz) ** 2
        )


@dataclasses.dataclass(frozen=True)
class BorderBand:
    """Blurred lung border

    :param float width: Shell thickness in normalized lung distance
    :param float inner_hu: HU at the lung surface, ramping up to body HU
    """

    width: float = 0.15
    inner_hu: float = -180.0


@dataclasses.dataclass(frozen=True)
class AirTube:
    """Air-tube-like tube along z

    :param int lung_index: Index of the lung holding the tube
    :param tuple center_xy: Tube axis (x, y), in voxels
    :param float max_lung_distance: Tube is cut where the normalized lung
        distance exceeds this value
    """

    lung_index: int = 0
    center_xy: tuple = (40.0, 80.0)
    outer_radius: float = 2.75
    inner_radius: float = 1.35
    wall_hu: float = -50.0
    wall_sigma: float = 10.0
    lumen_hu: float = -950.0
    max_lung_distance: float = 0.85


DEFAULT_LUNGS = (
    Ellipsoid((40.0, 64.0, 16.0), (18.0, 30.0, 12.0), -650.0, 50.0),
    Ellipsoid((88.0, 64.0, 16.0), (18.0, 30.0, 12.0), -650.0, 50.0),
)
DEFAULT_LESIONS = (
    Ellipsoid((40.0, 56.0, 16.0), (8.0, 10.0, 5.0), -100.0, 80.0),
    Ellipsoid((88.0, 72.0, 14.0), (7.0, 9.0, 4.0), -100.0, 80.0),
)


@dataclasses.dataclass(frozen=True)
class PhantomSpec:
    """Phantom parameters, geometry in voxel coordinates"""

    dims: tuple = (128, 128, 32)
    spacing: tuple = (0.7, 0.7, 5.0)
    seed: int = 0
    case_id: str = "phantom"
    body_center: tuple = (64.0, 64.0)
    body_radii: tuple = (58.0, 46.0)
    body_hu: float = 40.0
    body_sigma: float = 20.0
    air_hu: float = -1000.0
    lungs: tuple = DEFAULT_LUNGS
    lesions: tuple = DEFAULT_LESIONS
    border_band: BorderBand = BorderBand()
    air_tube: AirTube = None

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True, eq=False)
class Phantom:
    """Generated phantom

    :param dict decoys: Decoy name -> mask
    """

    spec: PhantomSpec
    volume: CtVolume
    gt_lung: BinaryMask3D
    gt_infected: BinaryMask3D
    decoys: dict = dataclasses.field(default_factory=dict)

    @property
    def poir(self):
        return poir(self.gt_infected, self.gt_lung)


def _check_spec(spec):
    if len(spec.dims) != 3 or min(spec.dims) < 1:
        raise SpecViolationError(f"Invalid dims {spec.dims}")
    if len(spec.spacing) != 3 or min(spec.spacing) <= 0:
        raise SpecViolationError(f"Invalid spacing {spec.spacing}")
    if not 0 <= spec.seed < 2**64:
        raise SpecViolationError(f"Seed {spec.seed} is not a 64-bit integer")
    if min(spec.body_radii) <= 0:
        raise SpecViolationError("Body radii must be positive")
    if spec.body_sigma < 0:
        raise SpecViolationError("Body sigma must be non negative")
    if not spec.lungs:
        raise SpecViolationError("At least one lung is needed")
    for kind, shapes in (("lung", spec.lungs), ("lesion", spec.lesions)):
        for index, shape in enumerate(shapes):
            if min(shape.radii) <= 0:
                raise SpecViolationError(f"{kind} {index}: radii must be positive")
            if shape.hu_sigma < 0:
                raise SpecViolationError(f"{kind} {index}: sigma must be non negative")
    if spec.border_band is not None and spec.border_band.width <= 0:
        raise SpecViolationError("Border band width must be positive")
    tube = spec.air_tube
    if tube is not None:
        if not 0 <= tube.lung_index < len(spec.lungs):
            raise SpecViolationError(f"Air tube lung index {tube.lung_index} invalid")
        if not 0 < tube.inner_radius < tube.outer_radius:
            raise SpecViolationError("Air tube needs 0 < inner radius < outer radius")
        if tube.wall_sigma < 0:
            raise SpecViolationError("Air tube wall sigma must be non negative")


def make_phantom(spec=None):
    """Generate a phantom volume with its ground truth masks

    :param PhantomSpec spec: Phantom parameters, defaults if None
    """
    spec = spec or PhantomSpec()
    _check_spec(spec)
    nx, ny, nz = spec.dims
    z, y, x = np.indices((nz, ny, nx), dtype=np.float64)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    noise = rng.standard_normal((nz, ny, nx))

    bx, by = spec.body_center
    brx, bry = spec.body_radii
    body = ((x - bx) / brx) ** 2 + ((y - by) / bry) ** 2 <= 1

    distances = [lung.distance(x, y, z) for lung in spec.lungs]
    lung_masks = [d <= 1 for d in distances]
    gt_lung = np.zeros((nz, ny, nx), dtype=bool)
    for index, mask in enumerate(lung_masks):
        if not mask.any():
            raise SpecViolationError(f"Lung {index} holds no voxel")
        if (mask & ~body).any():
            raise SpecViolationError(f"Lung {index} extends outside the body")
        gt_lung |= mask

    gt_infected = np.zeros((nz, ny, nx), dtype=bool)
    lesion_masks = []
    for index, lesion in enumerate(spec.lesions):
        mask = lesion.distance(x, y, z) <= 1
        if (mask & ~gt_lung).any():
            raise SpecViolationError(f"Lesion {index} extends outside the lungs")
        lesion_masks.append(mask)
        gt_infected |= mask

    hu = np.full((nz, ny, nx), spec.air_hu, dtype=np.float64)
    hu[body] = spec.body_hu + spec.body_sigma * noise[body]
    decoys = {}

    if spec.border_band is not None:
        band = spec.border_band
        nearest = np.minimum.reduce(distances)
        band_mask = body & ~gt_lung & (nearest <= 1 + band.width)
        slope = (spec.body_hu - band.inner_hu) / band.width
        ramp = band.inner_hu + slope * (nearest - 1)
        hu[band_mask] = ramp[band_mask]
        decoys["border_band"] = band_mask

    for lung, mask in zip(spec.lungs, lung_masks):
        hu[mask] = lung.hu_mean + lung.hu_sigma * noise[mask]

    if spec.air_tube is not None:
        tube = spec.air_tube
        tx, ty = tube.center_xy
        radius = np.hypot(x - tx, y - ty)
        inside = lung_masks[tube.lung_index] & (
            distances[tube.lung_index] <= tube.max_lung_distance
        )
        lumen = inside & (radius <= tube.inner_radius)
        wall = inside & (radius > tube.inner_radius) & (radius <= tube.outer_radius)
        if not wall.any():
            raise SpecViolationError("Air tube holds no voxel")
        hu[wall] = tube.wall_hu + tube.wall_sigma * noise[wall]
        hu[lumen] = tube.lumen_hu
        decoys["air_tube"] = (wall | lumen) & ~gt_infected
        decoys["air_tube_wall"] = wall & ~gt_infected

    for lesion, mask in zip(spec.lesions, lesion_masks):
        hu[mask] = lesion.hu_mean + lesion.hu_sigma * noise[mask]

    volume = CtVolume(to_hu_int16(hu), spec.spacing, case_id=spec.case_id)
    phantom = Phantom(
        spec=spec,
        volume=volume,
        gt_lung=BinaryMask3D(gt_lung, spec.spacing),
        gt_infected=BinaryMask3D(gt_infected, spec.spacing),
        decoys={k: BinaryMask3D(v, spec.spacing) for k, v in decoys.items()},
    )
    logger.info(
        "Phantom %s: %d lung voxels, %d infected voxels, decoys %s",
        spec.case_id,
        phantom.gt_lung.count,
        phantom.gt_infected.count,
        sorted(decoys),
    )
    return phantom
