"""CSV ingestion and resampling of raw accelerometer recordings.

Parsing yields a validated recording with time normalized to start at zero;
resampling puts it on a uniform grid so downstream frequency analysis is valid.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, ParseError

VALID_UNITS = ("g", "ms2")
VALID_TIME_UNITS = ("s", "ms")

# Below ~10 Hz there is no usable margin above the 4.6 Hz gait band.
MIN_SAMPLE_RATE_HZ = 10.0
# Dropouts longer than this are rejected rather than interpolated across.
MAX_GAP_S = 1.0
# Tolerance for treating a time grid as already uniform.
UNIFORM_TOL_S = 1e-9


@dataclass(frozen=True)
class AccelSample:
    """One triaxial sample; z is the anteroposterior axis."""

    t: float
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class IngestConfig:
    """Column mapping and unit flags for CSV parsing.

    time_unit selects seconds or milliseconds for the time column; units tags
    the acceleration values (g or m/s^2) so calibration and analysis can be
    checked for consistency.
    """

    time_col: str = "t"
    x_col: str = "x"
    y_col: str = "y"
    z_col: str = "z"
    time_unit: str = "s"
    units: str = "g"
    axis_convention: str = "z=anteroposterior"

    def __post_init__(self):
        if self.units not in VALID_UNITS:
            raise DataError(f"unknown units {self.units!r}; expected one of {VALID_UNITS}")
        if self.time_unit not in VALID_TIME_UNITS:
            raise DataError(
                f"unknown time unit {self.time_unit!r}; expected one of {VALID_TIME_UNITS}"
            )


@dataclass(frozen=True)
class AccelRecording:
    """Triaxial acceleration time series.

    Arrays are equal-length, finite, with strictly increasing t. After
    resample_uniform, sample_rate_hz is set and t lies on a uniform grid.
    Instances are immutable (arrays are marked read-only) and safe to share.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    units: str = "g"
    axis_convention: str = "z=anteroposterior"
    sample_rate_hz: float | None = None

    def __post_init__(self):
        for name in ("t", "x", "y", "z"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        n = len(self.t)
        if n < 2:
            raise DataError(f"recording needs at least 2 samples, got {n}")
        if not all(len(getattr(self, a)) == n for a in ("x", "y", "z")):
            raise DataError("axis arrays differ in length from time array")
        for name in ("t", "x", "y", "z"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise DataError(f"non-finite value in {name} column")
        if np.any(np.diff(self.t) <= 0):
            raise DataError("timestamps not strictly increasing")
        if self.units not in VALID_UNITS:
            raise DataError(f"unknown units {self.units!r}")
        if self.sample_rate_hz is not None:
            if self.sample_rate_hz <= 0:
                raise DataError("sample_rate_hz must be positive")
            dt = np.diff(self.t)
            if np.max(np.abs(dt - 1.0 / self.sample_rate_hz)) >= UNIFORM_TOL_S:
                raise DataError("recording tagged uniform but grid spacing is irregular")
        for name in ("t", "x", "y", "z"):
            getattr(self, name).setflags(write=False)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def duration_s(self) -> float:
        return float(self.t[-1] - self.t[0])

    def sample(self, i: int) -> AccelSample:
        return AccelSample(float(self.t[i]), float(self.x[i]), float(self.y[i]), float(self.z[i]))


@dataclass(frozen=True)
class SubjectProfile:
    """Standing height in meters plus the DMD diagnosis indicator."""

    height_m: float
    dmd: bool = False

    def __post_init__(self):
        if not math.isfinite(self.height_m):
            raise DataError("height_m must be finite")
        if not 0.5 <= self.height_m <= 2.5:
            raise DataError(f"height_m {self.height_m} outside sane range [0.5, 2.5] m")


def parse_recording(csv_text, config: IngestConfig | None = None) -> AccelRecording:
    """Parse a CSV character stream into a (not yet resampled) recording.

    Parameters
    ----------
    csv_text : str or text file object
        CSV with a header row naming the time column and three axis columns.
    config : IngestConfig
        Column names and unit flags; defaults expect columns t, x, y, z.

    Returns
    -------
    AccelRecording
        Validated recording with time normalized so the first sample is t=0.

    Raises
    ------
    ParseError
        On a missing column, a malformed row (reported with its row number),
        or non-monotone timestamps.
    """
    if config is None:
        config = IngestConfig()
    stream = io.StringIO(csv_text) if isinstance(csv_text, str) else csv_text
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise ParseError("empty input: no CSV header row")
    required = (config.time_col, config.x_col, config.y_col, config.z_col)
    missing = [c for c in required if c not in reader.fieldnames]
    if missing:
        raise ParseError(f"missing required column(s): {', '.join(missing)}")

    t, x, y, z = [], [], [], []
    # Header is line 1; first data row is line 2.
    for row_no, row in enumerate(reader, start=2):
        try:
            values = [float(row[c]) for c in required]
        except (TypeError, ValueError, KeyError) as exc:
            raise ParseError(f"malformed row {row_no}: {exc}") from exc
        if not all(math.isfinite(v) for v in values):
            raise ParseError(f"malformed row {row_no}: non-finite value")
        t.append(values[0])
        x.append(values[1])
        y.append(values[2])
        z.append(values[3])

    if len(t) < 2:
        raise ParseError(f"need at least 2 data rows, got {len(t)}")

    t_arr = np.asarray(t, dtype=float)
    if config.time_unit == "ms":
        t_arr = t_arr / 1000.0
    dt = np.diff(t_arr)
    if np.any(dt <= 0):
        bad = int(np.argmax(dt <= 0))
        raise ParseError(
            f"non-monotone timestamps at row {bad + 3}: "
            f"t={t_arr[bad + 1]:.6g} follows t={t_arr[bad]:.6g}"
        )
    t_arr = t_arr - t_arr[0]

    return AccelRecording(
        t=t_arr,
        x=np.asarray(x),
        y=np.asarray(y),
        z=np.asarray(z),
        units=config.units,
        axis_convention=config.axis_convention,
        sample_rate_hz=None,
    )


def resample_uniform(rec: AccelRecording, target_hz: float | None = None) -> AccelRecording:
    """Linearly interpolate each axis onto a uniform time grid.

    With target_hz=None the rate is inferred as round(1 / median(dt)). An
    already-uniform recording at the target rate is returned with its sample
    values untouched. Recordings with a gap longer than 1 s, or a median rate
    below 10 Hz, are rejected.
    """
    dt = np.diff(rec.t)
    if np.max(dt) > MAX_GAP_S:
        raise DataError(f"dropout of {np.max(dt):.3g} s exceeds the {MAX_GAP_S:.0f} s limit")
    if target_hz is None:
        target_hz = float(round(1.0 / float(np.median(dt))))
    if target_hz < MIN_SAMPLE_RATE_HZ:
        raise DataError(
            f"sample rate {target_hz:.3g} Hz too sparse for gait-band analysis "
            f"(minimum {MIN_SAMPLE_RATE_HZ:.0f} Hz)"
        )

    period = 1.0 / target_hz
    n_in = len(rec)
    uniform_grid = np.arange(n_in) * period
    if np.max(np.abs(rec.t - uniform_grid)) < UNIFORM_TOL_S:
        return replace(rec, t=uniform_grid, sample_rate_hz=target_hz)

    n_out = int(math.floor(rec.t[-1] * target_hz + UNIFORM_TOL_S)) + 1
    if n_out < 2:
        raise DataError("recording too short to resample")
    grid = np.arange(n_out) * period
    return AccelRecording(
        t=grid,
        x=np.interp(grid, rec.t, rec.x),
        y=np.interp(grid, rec.t, rec.y),
        z=np.interp(grid, rec.t, rec.z),
        units=rec.units,
        axis_convention=rec.axis_convention,
        sample_rate_hz=target_hz,
    )
