"""Stage error management

Tag errors raised inside a pipeline stage with the stage name.
"""

import contextlib
import logging

from ctpoir.exceptions import CTPoIRError, StageError

logger = logging.getLogger(__name__)


class catch_stage_error(contextlib.ContextDecorator):
    """Context manager re-raising CTPoIR errors as StageError

    Can be used as context manager or decorator.
    """

    def __init__(self, stage):
        self.stage = stage

    def __enter__(self):
        logger.debug("Entering stage %s", self.stage)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        if exc_type and issubclass(exc_type, CTPoIRError):
            # Don't tag twice when stages are nested
            if isinstance(exc_value, StageError):
                return False
            raise StageError(self.stage, exc_value) from exc_value
        return False
