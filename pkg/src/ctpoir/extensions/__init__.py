"""CTPoIR extensions"""

from .schemas import Schema  # noqa
from .stage_error import catch_stage_error  # noqa
from .executor import map_ordered  # noqa
