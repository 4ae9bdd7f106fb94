"""
Error types raised across the saccade pipeline.

The three family classes map to CLI exit codes in pipeline.py.
"""


class SaccadeError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationFailure(SaccadeError):
    """Config or file-format problem (exit code 2)."""


class CalibrationFailure(SaccadeError):
    """Calibration sweep could not produce a usable set (exit code 3)."""


class EvaluationFailure(SaccadeError):
    """Planning, execution or statistics failure (exit code 4)."""


# Configuration / persistence

class ConfigError(ConfigurationFailure):
    pass


class CalibrationIoError(ConfigurationFailure):
    pass


class ExportIoError(ConfigurationFailure):
    pass


class CalibrationParseError(ConfigurationFailure):
    """Malformed calibration record; `line` is 1-based (0 when unknown)."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"record at line {line}: {message}")


class DigestMismatch(ConfigurationFailure):
    def __init__(self, expected: str, found: str):
        self.expected = expected
        self.found = found
        super().__init__(
            f"calibration was collected with config digest {found[:12]}..., "
            f"current config digest is {expected[:12]}..."
        )


# Geometry

class InsufficientCorrespondences(EvaluationFailure):
    pass


class DegenerateConfiguration(EvaluationFailure):
    pass


class PointAtInfinity(EvaluationFailure):
    pass


# Rig

class OutOfRange(EvaluationFailure):
    pass


class TargetUnreachable(EvaluationFailure):
    pass


# Calibration sweep

class EmptyGrid(CalibrationFailure):
    pass


class AllSamplesDropped(CalibrationFailure):
    pass


# Saccade planning / execution

class NoValidNeighbors(EvaluationFailure):
    pass


class NoValidCell(EvaluationFailure):
    pass


class NonConvergence(EvaluationFailure):
    pass


class OutsideCalibrationHull(EvaluationFailure):
    pass


class TargetLost(EvaluationFailure):
    pass


# Evaluation

class Unreachable(EvaluationFailure):
    pass


class NoSuccessfulTrials(EvaluationFailure):
    pass
