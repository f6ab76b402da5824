"""Deterministic synthetic ambulation recordings with known ground truth.

Each scenario is a sequence of constant-cadence segments (cadence 0 = rest)
rendered as a phase-continuous sinusoid plus optional second harmonic, with
seeded uniform noise. The signal model is the minimal one that exercises both
spectral selection rules; it makes no claim of biomechanical realism.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .ingest import AccelRecording
from .spectral import GAIT_BAND_HZ

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MIN_SAMPLE_RATE_HZ = 10.0
# x/y channels carry only jitter at this fraction of the strongest amplitude.
XY_NOISE_FRACTION = 0.05


@dataclass(frozen=True)
class Segment:
    """One constant-cadence stretch of a scenario; cadence 0 means rest."""

    duration_s: float
    cadence_hz: float
    amplitude: float = 1.0
    harmonic2_ratio: float = 0.0

    def __post_init__(self):
        if self.duration_s <= 0:
            raise DataError(f"segment duration must be positive, got {self.duration_s}")
        if self.cadence_hz != 0 and not (
            GAIT_BAND_HZ[0] <= self.cadence_hz <= GAIT_BAND_HZ[1]
        ):
            raise DataError(
                f"cadence {self.cadence_hz} Hz outside {{0}} or "
                f"[{GAIT_BAND_HZ[0]}, {GAIT_BAND_HZ[1]}] Hz"
            )
        if self.amplitude < 0:
            raise DataError("amplitude must be nonnegative")
        if not 0 <= self.harmonic2_ratio < 1:
            raise DataError("harmonic2_ratio must lie in [0, 1)")

    @property
    def steps(self) -> float:
        return self.cadence_hz * self.duration_s


@dataclass(frozen=True)
class GaitScenario:
    """Complete description of a synthetic recording; deterministic given seed.

    Noise is uniform in [-noise_amplitude, +noise_amplitude] drawn from
    numpy's PCG64 generator seeded with seed, in the fixed order z, x, y, so
    any implementation using the same generator reproduces the recording.
    """

    segments: tuple[Segment, ...]
    sample_rate_hz: float = 100.0
    noise_amplitude: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise DataError("scenario needs at least one segment")
        if self.sample_rate_hz < MIN_SAMPLE_RATE_HZ:
            raise DataError(f"sample rate must be at least {MIN_SAMPLE_RATE_HZ} Hz")
        if self.noise_amplitude < 0:
            raise DataError("noise amplitude must be nonnegative")

    @property
    def duration_s(self) -> float:
        return sum(seg.duration_s for seg in self.segments)

    def to_dict(self) -> dict:
        return {
            "sample_rate_hz": self.sample_rate_hz,
            "noise_amplitude": self.noise_amplitude,
            "seed": self.seed,
            "segments": [
                {
                    "duration_s": seg.duration_s,
                    "cadence_hz": seg.cadence_hz,
                    "amplitude": seg.amplitude,
                    "harmonic2_ratio": seg.harmonic2_ratio,
                }
                for seg in self.segments
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GaitScenario":
        try:
            segments = tuple(
                Segment(
                    duration_s=float(seg["duration_s"]),
                    cadence_hz=float(seg["cadence_hz"]),
                    amplitude=float(seg.get("amplitude", 1.0)),
                    harmonic2_ratio=float(seg.get("harmonic2_ratio", 0.0)),
                )
                for seg in d["segments"]
            )
            return cls(
                segments=segments,
                sample_rate_hz=float(d.get("sample_rate_hz", 100.0)),
                noise_amplitude=float(d.get("noise_amplitude", 0.0)),
                seed=int(d.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"invalid scenario: {exc}") from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "GaitScenario":
        path = Path(path)
        if path.suffix.lower() == ".toml":
            with open(path, "rb") as fh:
                return cls.from_dict(tomllib.load(fh))
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))


@dataclass(frozen=True)
class GroundTruth:
    """Analytic truth for a generated scenario."""

    total_steps: float
    per_segment_steps: tuple[float, ...]
    active_duration_s: float
    window_frequencies: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "total_steps": self.total_steps,
            "per_segment_steps": list(self.per_segment_steps),
            "active_duration_s": self.active_duration_s,
            "window_frequencies": list(self.window_frequencies),
        }


def _window_frequency_schedule(
    scenario: GaitScenario, window_s: float, min_tail_s: float
) -> tuple[float, ...]:
    """Cadence covering the majority of each analysis window (0 for rest)."""
    edges = []
    start = 0.0
    for seg in scenario.segments:
        edges.append((start, start + seg.duration_s, seg.cadence_hz))
        start += seg.duration_s
    total = start

    freqs = []
    w_start = 0.0
    while w_start < total:
        w_end = min(total, w_start + window_s)
        if w_end == total and (w_end - w_start) < min(window_s, min_tail_s):
            break
        overlaps: dict[float, float] = {}
        for a, b, cadence in edges:
            ov = min(b, w_end) - max(a, w_start)
            if ov > 0:
                overlaps[cadence] = overlaps.get(cadence, 0.0) + ov
        freqs.append(max(overlaps.items(), key=lambda kv: kv[1])[0])
        w_start = w_end
    return tuple(freqs)


def generate(
    scenario: GaitScenario, window_s: float = 5.0, units: str = "g"
) -> tuple[AccelRecording, GroundTruth]:
    """Render a scenario into a uniform recording plus its analytic truth.

    The z axis is the phase-continuous gait signal with noise; x and y carry
    low-amplitude jitter only. Identical scenarios produce bit-identical
    output.
    """
    fs = scenario.sample_rate_hz
    n = int(round(scenario.duration_s * fs))
    if n < 2:
        raise DataError("scenario too short to render")
    t = np.arange(n) / fs
    z = np.zeros(n)

    phase = 0.0
    seg_start = 0.0
    for seg in scenario.segments:
        i0 = int(round(seg_start * fs))
        i1 = min(n, int(round((seg_start + seg.duration_s) * fs)))
        if seg.cadence_hz > 0 and i1 > i0:
            theta = phase + 2.0 * np.pi * seg.cadence_hz * (t[i0:i1] - seg_start)
            z[i0:i1] = seg.amplitude * (
                np.sin(theta) + seg.harmonic2_ratio * np.sin(2.0 * theta)
            )
        phase += 2.0 * np.pi * seg.cadence_hz * seg.duration_s
        seg_start += seg.duration_s

    rng = np.random.default_rng(scenario.seed)
    if scenario.noise_amplitude > 0:
        z = z + rng.uniform(-scenario.noise_amplitude, scenario.noise_amplitude, n)
    xy_amp = XY_NOISE_FRACTION * max(seg.amplitude for seg in scenario.segments)
    xy_amp = max(xy_amp, scenario.noise_amplitude * XY_NOISE_FRACTION, 1e-6)
    x = rng.uniform(-xy_amp, xy_amp, n)
    y = rng.uniform(-xy_amp, xy_amp, n)

    recording = AccelRecording(t=t, x=x, y=y, z=z, units=units, sample_rate_hz=fs)
    truth = GroundTruth(
        total_steps=sum(seg.steps for seg in scenario.segments),
        per_segment_steps=tuple(seg.steps for seg in scenario.segments),
        active_duration_s=sum(
            seg.duration_s for seg in scenario.segments if seg.cadence_hz > 0
        ),
        window_frequencies=_window_frequency_schedule(scenario, window_s, min_tail_s=2.0),
    )
    return recording, truth
