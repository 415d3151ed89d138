"""Phantom spec schemas"""

import json
from pathlib import Path

import marshmallow as ma

from ctpoir.exceptions import SpecViolationError
from ctpoir.extensions import Schema
from ctpoir.extensions.ma_fields import Dims, HUValue, Point, Radii, Spacing

from .phantom import AirTube, BorderBand, Ellipsoid, PhantomSpec

DEFAULTS = PhantomSpec()
TUBE_DEFAULTS = AirTube()
BAND_DEFAULTS = BorderBand()

NonNegative = ma.validate.Range(min=0)


class EllipsoidSchema(Schema):
    center = Point(
        required=True,
        metadata={"description": "Center (x, y, z), in voxels"},
    )
    radii = Radii(
        required=True,
        metadata={"description": "Radii (rx, ry, rz), in voxels"},
    )
    hu_mean = HUValue(
        required=True,
        metadata={"description": "Mean HU"},
    )
    hu_sigma = ma.fields.Float(
        required=True,
        validate=NonNegative,
        metadata={"description": "HU standard deviation"},
    )

    @ma.post_load
    def make_ellipsoid(self, data, **kwargs):
        return Ellipsoid(**data)


class BorderBandSchema(Schema):
    width = ma.fields.Float(
        load_default=BAND_DEFAULTS.width,
        validate=ma.validate.Range(min=0, min_inclusive=False),
        metadata={"description": "Shell thickness, in normalized lung distance"},
    )
    inner_hu = HUValue(
        load_default=BAND_DEFAULTS.inner_hu,
        metadata={"description": "HU at the lung surface"},
    )

    @ma.post_load
    def make_band(self, data, **kwargs):
        return BorderBand(**data)


class AirTubeSchema(Schema):
    lung_index = ma.fields.Integer(
        load_default=TUBE_DEFAULTS.lung_index,
        validate=NonNegative,
        metadata={"description": "Index of the lung holding the tube"},
    )
    center_xy = ma.fields.Tuple(
        (ma.fields.Float(), ma.fields.Float()),
        load_default=TUBE_DEFAULTS.center_xy,
        metadata={"description": "Tube axis (x, y), in voxels"},
    )
    outer_radius = ma.fields.Float(
        load_default=TUBE_DEFAULTS.outer_radius,
        validate=ma.validate.Range(min=0, min_inclusive=False),
    )
    inner_radius = ma.fields.Float(
        load_default=TUBE_DEFAULTS.inner_radius,
        validate=ma.validate.Range(min=0, min_inclusive=False),
    )
    wall_hu = HUValue(load_default=TUBE_DEFAULTS.wall_hu)
    wall_sigma = ma.fields.Float(
        load_default=TUBE_DEFAULTS.wall_sigma, validate=NonNegative
    )
    lumen_hu = HUValue(load_default=TUBE_DEFAULTS.lumen_hu)
    max_lung_distance = ma.fields.Float(
        load_default=TUBE_DEFAULTS.max_lung_distance,
        validate=ma.validate.Range(min=0, max=1, min_inclusive=False),
        metadata={"description": "Normalized lung distance cutting the tube ends"},
    )

    @ma.post_load
    def make_tube(self, data, **kwargs):
        return AirTube(**data)


class PhantomSpecSchema(Schema):
    dims = Dims(
        load_default=DEFAULTS.dims,
        metadata={"description": "Voxel counts (nx, ny, nz)"},
    )
    spacing = Spacing(
        load_default=DEFAULTS.spacing,
        metadata={"description": "Voxel spacing (sx, sy, sz) in mm"},
    )
    seed = ma.fields.Integer(
        load_default=DEFAULTS.seed,
        validate=ma.validate.Range(min=0, max=2**64 - 1),
        metadata={"description": "PCG64 seed"},
    )
    case_id = ma.fields.String(load_default=DEFAULTS.case_id)
    body_center = ma.fields.Tuple(
        (ma.fields.Float(), ma.fields.Float()),
        load_default=DEFAULTS.body_center,
        metadata={"description": "Body axis (x, y), in voxels"},
    )
    body_radii = ma.fields.Tuple(
        (
            ma.fields.Float(validate=ma.validate.Range(min=0, min_inclusive=False)),
            ma.fields.Float(validate=ma.validate.Range(min=0, min_inclusive=False)),
        ),
        load_default=DEFAULTS.body_radii,
        metadata={"description": "Body radii (rx, ry), in voxels"},
    )
    body_hu = HUValue(load_default=DEFAULTS.body_hu)
    body_sigma = ma.fields.Float(load_default=DEFAULTS.body_sigma, validate=NonNegative)
    air_hu = HUValue(load_default=DEFAULTS.air_hu)
    lungs = ma.fields.List(
        ma.fields.Nested(EllipsoidSchema),
        validate=ma.validate.Length(min=1),
        metadata={"description": "Lung ellipsoids, defaults to two lungs"},
    )
    lesions = ma.fields.List(
        ma.fields.Nested(EllipsoidSchema),
        metadata={"description": "Lesion blobs, each inside a lung"},
    )
    border_band = ma.fields.Nested(
        BorderBandSchema,
        allow_none=True,
        metadata={"description": "Border blur band decoy, null to disable"},
    )
    air_tube = ma.fields.Nested(
        AirTubeSchema,
        allow_none=True,
        metadata={"description": "Air tube decoy, absent or null to disable"},
    )

    @ma.post_load
    def make_spec(self, data, **kwargs):
        for key in ("lungs", "lesions"):
            if key in data:
                data[key] = tuple(data[key])
        return PhantomSpec(**data)


def load_phantom_spec(path):
    """Read a phantom spec JSON file

    Missing keys take the default phantom values.
    """
    path = Path(path)
    try:
        content = json.loads(path.read_text(encoding="utf-8"))
        return PhantomSpecSchema().load(content)
    except OSError as exc:
        raise SpecViolationError(f"Can't read phantom spec {path}: {exc}") from exc
    except (ValueError, ma.ValidationError) as exc:
        raise SpecViolationError(f"Invalid phantom spec {path}: {exc}") from exc
