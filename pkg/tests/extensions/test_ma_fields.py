import pytest

import marshmallow as ma

from ctpoir.extensions.ma_fields import Dims, HUValue, Point, Probability, Spacing


class TestMaFields:
    def test_ma_fields_dims(self):
        field = Dims()
        assert field.deserialize([128, 128, 32]) == (128, 128, 32)
        with pytest.raises(ma.ValidationError):
            field.deserialize([128, 128])
        with pytest.raises(ma.ValidationError):
            field.deserialize([128, 0, 32])
        with pytest.raises(ma.ValidationError):
            field.deserialize([128, 12.5, 32])

    def test_ma_fields_spacing(self):
        field = Spacing()
        assert field.deserialize([0.7, 0.7, 5]) == (0.7, 0.7, 5.0)
        with pytest.raises(ma.ValidationError):
            field.deserialize([0.7, 0, 5])
        with pytest.raises(ma.ValidationError):
            field.deserialize([0.7, -0.7, 5])

    def test_ma_fields_point(self):
        field = Point()
        assert field.deserialize([40, 56.5, -1]) == (40.0, 56.5, -1.0)
        assert field.serialize("p", {"p": (1.0, 2.0, 3.0)}) == (1.0, 2.0, 3.0)

    def test_ma_fields_hu_value(self):
        field = HUValue()
        assert field.deserialize(-1000) == -1000.0
        assert field.deserialize(32767) == 32767.0
        with pytest.raises(ma.ValidationError):
            field.deserialize(40000)
        with pytest.raises(ma.ValidationError):
            field.deserialize(-32769)

    def test_ma_fields_probability(self):
        field = Probability()
        assert field.deserialize(0) == 0.0
        assert field.deserialize("0.45") == 0.45
        assert field.deserialize(1) == 1.0
        with pytest.raises(ma.ValidationError):
            field.deserialize(1.01)
        with pytest.raises(ma.ValidationError):
            field.deserialize(-0.1)
