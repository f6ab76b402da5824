"""Per-window gait analysis and whole-recording aggregation.

A recording is tiled into 5-second windows. Each window gets an active-time
classification against the calibration threshold, a spectral step frequency,
and the derived step count, step length, distance, and velocity. Window
metrics are then summed into whole-recording totals and averages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calibration import CalibrationProfile
from .errors import DataError
from .ingest import AccelRecording, SubjectProfile
from .spectral import (
    GAIT_BAND_HZ,
    SUBHARMONIC_RATIO,
    fft_magnitude,
    select_step_frequency,
)
from .step_length import DEFAULT_MODEL, StepLengthModel

DEFAULT_WINDOW_S = 5.0
# Final partial windows shorter than this are dropped (no full gait cycle fits).
MIN_TAIL_S = 2.0


@dataclass(frozen=True)
class TimeWindow:
    """One non-overlapping slice of the recording's z-axis signal.

    samples hold the mean-removed z values for [t_start, t_end); windows tile
    the recording in order without gap or overlap.
    """

    index: int
    t_start: float
    t_end: float
    duration_s: float
    samples: np.ndarray
    sample_rate_hz: float
    units: str

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if self.duration_s <= 0:
            raise DataError("window duration must be positive")
        self.samples.setflags(write=False)


@dataclass(frozen=True)
class WindowMetrics:
    """Gait quantities estimated for one time window."""

    index: int
    t_start: float
    duration_s: float
    active_s: int
    second_mask: tuple[bool, ...]
    step_frequency_hz: float
    rule: str
    steps: float
    step_length_m: float
    distance_m: float
    velocity_mps: float
    sf_clamped: bool = False
    sl_floored: bool = False

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "t_start": self.t_start,
            "duration_s": self.duration_s,
            "active_s": self.active_s,
            "step_frequency_hz": self.step_frequency_hz,
            "rule": self.rule,
            "steps": self.steps,
            "step_length_m": self.step_length_m,
            "distance_m": self.distance_m,
            "velocity_mps": self.velocity_mps,
        }


@dataclass(frozen=True)
class GaitSummary:
    """Whole-recording totals and averages across all analyzed windows."""

    n_windows: int
    total_duration_s: float
    active_duration_s: float
    total_steps: float
    total_steps_rounded: int
    avg_step_frequency_hz: float
    avg_step_length_m: float
    avg_step_velocity_mps: float
    total_distance_m: float
    p95_velocity_mps: float

    def to_dict(self) -> dict:
        return {
            "n_windows": self.n_windows,
            "total_duration_s": self.total_duration_s,
            "active_duration_s": self.active_duration_s,
            "total_steps": self.total_steps,
            "total_steps_rounded": self.total_steps_rounded,
            "avg_step_frequency_hz": self.avg_step_frequency_hz,
            "avg_step_length_m": self.avg_step_length_m,
            "avg_step_velocity_mps": self.avg_step_velocity_mps,
            "total_distance_m": self.total_distance_m,
            "p95_velocity_mps": self.p95_velocity_mps,
        }


def split_windows(rec: AccelRecording, window_s: float = DEFAULT_WINDOW_S) -> list[TimeWindow]:
    """Tile a uniform recording into consecutive non-overlapping windows.

    The trailing partial window is kept when it spans at least 2 s, otherwise
    dropped. Raises DataError for recordings shorter than 2 s.
    """
    if rec.sample_rate_hz is None:
        raise DataError("recording must be resampled to a uniform grid before windowing")
    if window_s <= 0:
        raise DataError("window length must be positive")
    fs = rec.sample_rate_hz
    n = len(rec)
    if n / fs < MIN_TAIL_S:
        raise DataError(f"recording of {n / fs:.3g} s is shorter than {MIN_TAIL_S:.0f} s")

    z = rec.z - float(np.mean(rec.z))
    samples_per_window = max(1, int(round(window_s * fs)))
    windows: list[TimeWindow] = []
    start = 0
    while start < n:
        stop = min(n, start + samples_per_window)
        count = stop - start
        if stop == n and count < samples_per_window and count / fs < MIN_TAIL_S:
            break
        windows.append(
            TimeWindow(
                index=len(windows),
                t_start=start / fs,
                t_end=stop / fs,
                duration_s=count / fs,
                samples=z[start:stop],
                sample_rate_hz=fs,
                units=rec.units,
            )
        )
        start = stop
    return windows


def classify_active_seconds(
    window: TimeWindow, cal: CalibrationProfile
) -> tuple[int, list[bool]]:
    """Classify each 1-second sub-interval of a window as active or not.

    A second is active when the maximum absolute (mean-removed) acceleration
    within it meets or exceeds the calibration threshold. A trailing fragment
    of at least half a second counts as its own interval; a shorter one is
    folded into the final full second.
    """
    if window.units != cal.units:
        raise DataError(
            f"unit mismatch: window in {window.units!r}, calibration in {cal.units!r}"
        )
    samples = window.samples
    per_second = max(1, int(round(window.sample_rate_hz)))
    n = len(samples)
    n_full = n // per_second
    remainder = n - n_full * per_second

    bounds: list[tuple[int, int]] = [
        (k * per_second, (k + 1) * per_second) for k in range(n_full)
    ]
    if remainder > 0:
        if 2 * remainder >= per_second or not bounds:
            bounds.append((n_full * per_second, n))
        else:
            last_start, _ = bounds[-1]
            bounds[-1] = (last_start, n)

    mask = [bool(np.max(np.abs(samples[a:b])) >= cal.threshold) for a, b in bounds]
    return sum(mask), mask


def analyze_window(
    window: TimeWindow,
    cal: CalibrationProfile,
    subject: SubjectProfile,
    band: tuple[float, float] = GAIT_BAND_HZ,
    ratio: float = SUBHARMONIC_RATIO,
    model: StepLengthModel = DEFAULT_MODEL,
) -> WindowMetrics:
    """Run the full per-window estimation chain.

    Steps are the product of step frequency and active seconds; distance the
    product of steps and predicted step length; velocity distance over active
    time (zero when the window has no active seconds).
    """
    active_s, mask = classify_active_seconds(window, cal)
    spectrum = fft_magnitude(window.samples, window.sample_rate_hz)
    decision = select_step_frequency(spectrum, band=band, ratio=ratio)
    sf = decision.frequency_hz

    prediction = model.evaluate(sf, subject)
    steps = sf * active_s
    distance = steps * prediction.step_length_m
    velocity = distance / active_s if active_s > 0 else 0.0
    return WindowMetrics(
        index=window.index,
        t_start=window.t_start,
        duration_s=window.duration_s,
        active_s=active_s,
        second_mask=tuple(mask),
        step_frequency_hz=sf,
        rule=decision.rule,
        steps=steps,
        step_length_m=prediction.step_length_m,
        distance_m=distance,
        velocity_mps=velocity,
        sf_clamped=prediction.sf_clamped,
        sl_floored=prediction.floored,
    )


def summarize(metrics: list[WindowMetrics]) -> GaitSummary:
    """Aggregate window metrics into whole-recording totals and averages.

    Total duration includes inactive time, so the average step frequency and
    velocity are diluted by rests; average step length is distance per step.
    The rounded step total uses round-half-up. The 95th-percentile velocity is
    taken over windows that had any active time, with linear interpolation
    between order statistics.
    """
    if not metrics:
        raise DataError("cannot summarize an empty window list")
    total_duration = sum(m.duration_s for m in metrics)
    active_duration = float(sum(m.active_s for m in metrics))
    total_steps = sum(m.steps for m in metrics)
    total_distance = sum(m.distance_m for m in metrics)
    active_velocities = [m.velocity_mps for m in metrics if m.active_s > 0]
    return GaitSummary(
        n_windows=len(metrics),
        total_duration_s=total_duration,
        active_duration_s=active_duration,
        total_steps=total_steps,
        total_steps_rounded=int(math.floor(total_steps + 0.5)),
        avg_step_frequency_hz=total_steps / total_duration,
        avg_step_length_m=total_distance / total_steps if total_steps > 0 else 0.0,
        avg_step_velocity_mps=total_distance / total_duration,
        total_distance_m=total_distance,
        p95_velocity_mps=(
            float(np.percentile(active_velocities, 95)) if active_velocities else 0.0
        ),
    )


def analyze_recording(
    rec: AccelRecording,
    cal: CalibrationProfile,
    subject: SubjectProfile,
    window_s: float = DEFAULT_WINDOW_S,
    band: tuple[float, float] = GAIT_BAND_HZ,
    ratio: float = SUBHARMONIC_RATIO,
    model: StepLengthModel = DEFAULT_MODEL,
) -> tuple[list[WindowMetrics], GaitSummary]:
    """Analyze a whole uniform recording window by window.

    The z axis is mean-removed once for the recording (matching calibration's
    detrending) before windowing. Windows are processed in order; each is
    independent of the others.
    """
    if rec.units != cal.units:
        raise DataError(
            f"unit mismatch: recording in {rec.units!r}, calibration in {cal.units!r}"
        )
    windows = split_windows(rec, window_s=window_s)
    if not windows:
        raise DataError("no analyzable windows in recording")
    metrics = [
        analyze_window(w, cal, subject, band=band, ratio=ratio, model=model)
        for w in windows
    ]
    return metrics, summarize(metrics)
