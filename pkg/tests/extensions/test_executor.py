"""Test ordered parallel map"""

import threading
import time

import pytest

from ctpoir.extensions import map_ordered


class TestMapOrdered:
    @pytest.mark.parametrize("threads", (1, 2, 8))
    def test_map_ordered_keeps_input_order(self, threads):
        def slow_square(value):
            # Later items finish first
            time.sleep((10 - value) / 1000)
            return value * value

        assert map_ordered(slow_square, range(10), threads) == [
            v * v for v in range(10)
        ]

    def test_map_ordered_uses_threads(self):
        names = set()

        def record(value):
            names.add(threading.current_thread().name)
            time.sleep(0.01)
            return value

        map_ordered(record, range(8), threads=4)
        assert len(names) > 1
        names.clear()
        map_ordered(record, range(8), threads=1)
        assert names == {threading.current_thread().name}

    @pytest.mark.parametrize("threads", (1, 4))
    def test_map_ordered_error_from_first_failing_item(self, threads):
        def fail_on_odd(value):
            if value % 2:
                raise ValueError(value)
            return value

        with pytest.raises(ValueError) as excinfo:
            map_ordered(fail_on_odd, range(6), threads)
        assert excinfo.value.args == (1,)

    def test_map_ordered_empty(self):
        assert map_ordered(str, [], threads=4) == []
