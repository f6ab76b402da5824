"""Exception types shared across the package.

The CLI maps each type to a stable exit code (see cli.EXIT_CODES).
"""


class GaitError(Exception):
    """Base class for all pipeline errors."""


class ParseError(GaitError):
    """Corrupt or malformed input text (CSV rows, scenario files)."""


class DataError(GaitError):
    """Input fails validation: too short, too sparse, bad values, unit mismatch."""


class CalibrationError(GaitError):
    """Calibration recording unusable (too few detectable steps)."""


class StatsError(GaitError):
    """Paired-series input unsuitable for agreement statistics."""
