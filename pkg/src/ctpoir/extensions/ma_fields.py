"""Custom marshmallow fields"""

import marshmallow as ma

HU_MIN = -32768
HU_MAX = 32767


class Triple(ma.fields.Tuple):
    """A 3-tuple of homogeneous values, serialized as a JSON list"""

    def __init__(self, field_cls, field_kwargs=None, **kwargs):
        field_kwargs = field_kwargs or {}
        super().__init__(tuple(field_cls(**field_kwargs) for _ in range(3)), **kwargs)


class Dims(Triple):
    """Voxel counts (nx, ny, nz), each >= 1"""

    def __init__(self, **kwargs):
        super().__init__(
            ma.fields.Integer,
            field_kwargs={"strict": True, "validate": ma.validate.Range(min=1)},
            **kwargs,
        )


class Spacing(Triple):
    """Voxel spacing (sx, sy, sz) in mm, each > 0"""

    def __init__(self, **kwargs):
        super().__init__(
            ma.fields.Float,
            field_kwargs={
                "allow_nan": False,
                "validate": ma.validate.Range(min=0, min_inclusive=False),
            },
            **kwargs,
        )


class Point(Triple):
    """Voxel coordinates (x, y, z), fractional allowed"""

    def __init__(self, **kwargs):
        super().__init__(ma.fields.Float, **kwargs)


class Radii(Spacing):
    """Ellipsoid radii (rx, ry, rz) in voxels, each > 0"""


class HUValue(ma.fields.Float):
    """A Hounsfield value within the signed 16-bit range"""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.validators.insert(0, ma.validate.Range(HU_MIN, HU_MAX))


class Probability(ma.fields.Float):
    """A probability in [0, 1]"""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.validators.insert(0, ma.validate.Range(0, 1))
