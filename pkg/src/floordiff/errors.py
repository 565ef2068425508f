"""Exception types raised across the package.

DataError subclasses indicate bad inputs or bad files; ModelError subclasses
indicate problems with checkpoints, conditioning, or numerical state of a
network.  The CLI maps DataError to exit code 3 and ModelError to exit code 4.
"""


class FloorDiffError(Exception):
    pass


class DataError(FloorDiffError):
    pass


class ModelError(FloorDiffError):
    pass


# geometry / codecs

class MalformedBoundary(DataError):
    pass


class TooManyRooms(DataError):
    pass


class InvalidCategory(DataError):
    pass


# synthetic data

class GenerationExhausted(DataError):
    pass


class CorruptRecord(DataError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


# diffusion core

class InvalidScheduleParams(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class EmptyElementMap(DataError):
    pass


# denoiser / training

class ConditioningMismatch(ModelError):
    pass


class NonFiniteOutput(ModelError):
    pass


class VersionMismatch(ModelError):
    pass


class CorruptCheckpoint(ModelError):
    pass


class NonFiniteLoss(ModelError):
    pass


class DatasetStageMismatch(DataError):
    pass


# pipeline

class MissingCheckpoint(ModelError):
    pass


class DegenerateInput(DataError):
    pass


# metrics

class UndefinedRatio(DataError):
    pass


class TooFewSamples(DataError):
    pass
