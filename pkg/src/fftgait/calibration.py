"""Activity-threshold calibration from the slowest-walk recording.

One peak is detected per step of the designated calibration walk; the
threshold is the mean of those peak values plus their population standard
deviation. Seconds whose peak acceleration reaches the threshold are later
classified as active.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import CalibrationError, DataError
from .ingest import AccelRecording

DEFAULT_MIN_STEP_SEPARATION_S = 0.4
DEFAULT_PROMINENCE_FRACTION = 0.25
MIN_CALIBRATION_DURATION_S = 10.0
MIN_STEP_PEAKS = 3


@dataclass(frozen=True)
class CalibrationProfile:
    """Activity threshold derived from per-step calibration peaks.

    threshold equals mu_peaks + sigma_peaks, where sigma is the population
    (divide-by-m) standard deviation; units tags the signal units it applies to.
    """

    threshold: float
    mu_peaks: float
    sigma_peaks: float
    n_steps: int
    units: str

    def __post_init__(self):
        if self.sigma_peaks < 0:
            raise DataError("sigma_peaks must be nonnegative")
        # n_steps == 0 marks an explicitly supplied threshold (no peak stats).
        if self.n_steps != 0 and self.n_steps < MIN_STEP_PEAKS:
            raise DataError(f"calibration needs at least {MIN_STEP_PEAKS} steps")
        if abs(self.threshold - (self.mu_peaks + self.sigma_peaks)) > 1e-12:
            raise DataError("threshold must equal mu_peaks + sigma_peaks")

    @classmethod
    def explicit(cls, threshold: float, units: str) -> "CalibrationProfile":
        """Profile from a user-supplied threshold instead of a calibration walk."""
        if not math.isfinite(threshold) or threshold <= 0:
            raise DataError(f"explicit threshold must be a positive number, got {threshold}")
        return cls(
            threshold=threshold, mu_peaks=threshold, sigma_peaks=0.0, n_steps=0, units=units
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "threshold": self.threshold,
                "mu_peaks": self.mu_peaks,
                "sigma_peaks": self.sigma_peaks,
                "n_steps_m": self.n_steps,
                "unit": self.units,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "CalibrationProfile":
        d = json.loads(text)
        threshold = float(d["threshold"])
        mu = float(d["mu_peaks"])
        sigma = float(d["sigma_peaks"])
        # serialized floats are rounded; re-derive the exact identity after
        # checking the document is self-consistent
        if abs(threshold - (mu + sigma)) > 1e-4 * max(1.0, abs(threshold)):
            raise DataError("calibration file inconsistent: threshold != mu + sigma")
        return cls(
            threshold=mu + sigma,
            mu_peaks=mu,
            sigma_peaks=sigma,
            n_steps=int(d["n_steps_m"]),
            units=str(d["unit"]),
        )


def detect_step_peaks(
    rec: AccelRecording,
    min_step_separation_s: float = DEFAULT_MIN_STEP_SEPARATION_S,
    prominence_fraction: float = DEFAULT_PROMINENCE_FRACTION,
) -> list[tuple[float, float]]:
    """Locate the highest peak of each step in a slow calibration walk.

    The z axis is detrended by its whole-recording mean, then local maxima
    separated by at least min_step_separation_s and with prominence of at
    least prominence_fraction of the signal's peak-to-peak range are kept.

    Returns an ordered list of (time, peak value) pairs, one per step.

    Raises CalibrationError when fewer than 3 step peaks are found, DataError
    when the recording is not uniform or shorter than 10 s.
    """
    if rec.sample_rate_hz is None:
        raise DataError("calibration recording must be resampled to a uniform grid first")
    covered_s = len(rec) / rec.sample_rate_hz
    if covered_s < MIN_CALIBRATION_DURATION_S:
        raise DataError(
            f"calibration recording of {covered_s:.3g} s is shorter than "
            f"the required {MIN_CALIBRATION_DURATION_S:.0f} s"
        )
    z = rec.z - float(np.mean(rec.z))
    span = float(np.max(z) - np.min(z))
    if span <= 0:
        raise CalibrationError("flat signal: no step peaks detectable")
    distance = max(1, int(round(min_step_separation_s * rec.sample_rate_hz)))
    idx, _ = find_peaks(z, distance=distance, prominence=prominence_fraction * span)
    if len(idx) < MIN_STEP_PEAKS:
        raise CalibrationError(
            f"only {len(idx)} step peak(s) found; need at least {MIN_STEP_PEAKS} "
            "for a usable calibration"
        )
    return [(float(rec.t[i]), float(z[i])) for i in idx]


def compute_threshold(peaks, units: str = "g") -> CalibrationProfile:
    """Compute the activity threshold from per-step peak values.

    mu is the arithmetic mean, sigma the population (divide-by-m) standard
    deviation, and the threshold their sum.
    """
    values = np.asarray(list(peaks), dtype=float)
    if len(values) < MIN_STEP_PEAKS:
        raise CalibrationError(f"need at least {MIN_STEP_PEAKS} peaks, got {len(values)}")
    if not np.all(np.isfinite(values)):
        raise DataError("non-finite peak value")
    mu = float(np.mean(values))
    sigma = math.sqrt(float(np.mean((values - mu) ** 2)))
    return CalibrationProfile(
        threshold=mu + sigma,
        mu_peaks=mu,
        sigma_peaks=sigma,
        n_steps=len(values),
        units=units,
    )


def calibrate_recording(rec: AccelRecording, **peak_opts) -> CalibrationProfile:
    """Detect step peaks in a calibration recording and derive its threshold."""
    peaks = detect_step_peaks(rec, **peak_opts)
    return compute_threshold([v for _, v in peaks], units=rec.units)
