"""Internal format header schemas"""

import marshmallow as ma

from ctpoir.extensions import Schema
from ctpoir.extensions.ma_fields import Dims, Spacing

DTYPES = {
    "i16": "<i2",
    "u8": "u1",
    "f32": "<f4",
}


class GridHeaderSchema(Schema):
    dims = Dims(
        required=True,
        metadata={"description": "Voxel counts (nx, ny, nz)"},
    )
    spacing = Spacing(
        required=True,
        metadata={"description": "Voxel spacing (sx, sy, sz) in mm"},
    )
    case_id = ma.fields.String(
        metadata={"description": "Opaque case identifier (volumes only)"},
    )
    byte_order = ma.fields.String(
        required=True,
        validate=ma.validate.OneOf(("LE",)),
        metadata={"description": "Payload byte order"},
    )
    dtype = ma.fields.String(
        required=True,
        validate=ma.validate.OneOf(tuple(DTYPES)),
        metadata={"description": "Payload value type"},
    )
