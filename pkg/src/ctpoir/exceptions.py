"""Exceptions"""


class CTPoIRError(Exception):
    """Base CTPoIR exception"""

    exit_code = 3


class CTPoIRInputError(CTPoIRError):
    """Invalid input file, argument or configuration"""

    exit_code = 2


class CTPoIRPipelineError(CTPoIRError):
    """Failure while running a pipeline stage"""

    exit_code = 3


class ConfigError(CTPoIRInputError):
    """Invalid configuration"""


class VolumeIOError(CTPoIRInputError):
    """Volume, mask or probability map file error"""


class MissingTagError(VolumeIOError):
    """Required DICOM tag missing"""

    def __init__(self, tag, path=None):
        self.tag = tag
        self.path = path
        where = f" in {path}" if path is not None else ""
        super().__init__(f"Missing DICOM tag {tag}{where}")


class InconsistentSeriesError(VolumeIOError):
    """Slices of a series disagree on geometry"""


class UnsupportedTransferSyntaxError(VolumeIOError):
    """Compressed or big endian pixel data"""


class UnsupportedPixelFormatError(VolumeIOError):
    """Pixel data layout not handled (bits allocated, samples per pixel)"""


class HeaderMismatchError(VolumeIOError):
    """Header does not describe the payload"""


class DimMismatchError(CTPoIRInputError):
    """Grids with different dimensions or spacing"""


class OutOfRangeError(CTPoIRPipelineError):
    """Voxel value outside the expected range"""


class ValueOutOfRangeError(VolumeIOError):
    """Probability outside [0, 1]"""

    def __init__(self, voxel, value):
        self.voxel = voxel
        self.value = value
        super().__init__(f"Probability {value!r} at voxel {voxel} outside [0, 1]")


class EmptyIntersectionError(CTPoIRPipelineError):
    """Region does not intersect slice"""


class SegmenterError(CTPoIRPipelineError):
    """Segmenter failed on a slice stack"""

    def __init__(self, center_index, message=""):
        self.center_index = center_index
        super().__init__(f"Segmenter failed on stack {center_index}: {message}")


class ScorerError(CTPoIRPipelineError):
    """Scorer failed on a region"""

    def __init__(self, region_id, message=""):
        self.region_id = region_id
        super().__init__(f"Scorer failed on region {region_id}: {message}")


class EmptyListError(CTPoIRPipelineError):
    """Metric over an empty list"""


class EmptyLungError(CTPoIRPipelineError):
    """Lung volume is zero"""


class ZeroVarianceError(CTPoIRPipelineError):
    """Constant series"""


class ZeroGroundTruthError(CTPoIRPipelineError):
    """Ground truth value of zero in a relative error"""

    def __init__(self, index):
        self.index = index
        super().__init__(f"Ground truth is zero at index {index}")


class SingleClassError(CTPoIRPipelineError):
    """Only one class present in labels"""


class SpecViolationError(CTPoIRInputError):
    """Phantom spec invariants violated"""


class StageError(CTPoIRError):
    """Error raised by a pipeline stage, tagged with the stage name"""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code
        super().__init__(f"[{stage}] {cause}")
