"""Frequency-domain step-frequency detection for one time window.

The window's z-axis signal is mean-removed, Hann-tapered, zero-padded, and
transformed; the step frequency is the dominant gait-band peak, unless a
lower-frequency peak qualifies under the 60% frequency/magnitude rule (a
stride-frequency subharmonic outweighing its own harmonic).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

GAIT_BAND_HZ = (0.3, 4.6)
SUBHARMONIC_RATIO = 0.6
# Local maxima below this fraction of the spectrum's global peak are noise ripple.
NOISE_FLOOR_FRACTION = 0.05
MIN_SIGNAL_LEN = 16
# Nyquist margin: twice the 4.6 Hz band edge.
MIN_SAMPLE_RATE_HZ = 9.2
PAD_FACTOR = 8

RULE_NONE_IN_BAND = "none_in_band"
RULE_DOMINANT_PEAK = "dominant_peak"
RULE_SUBHARMONIC_PEAK = "subharmonic_peak"


@dataclass(frozen=True)
class Spectrum:
    """One-sided magnitude spectrum on a uniform frequency grid."""

    freqs: np.ndarray
    mags: np.ndarray
    resolution_hz: float

    def __post_init__(self):
        object.__setattr__(self, "freqs", np.asarray(self.freqs, dtype=float))
        object.__setattr__(self, "mags", np.asarray(self.mags, dtype=float))
        if len(self.freqs) != len(self.mags):
            raise DataError("freqs and mags must have equal length")
        if len(self.freqs) and self.freqs[0] != 0.0:
            raise DataError("spectrum must start at 0 Hz")
        self.freqs.setflags(write=False)
        self.mags.setflags(write=False)

    def to_dict(self) -> dict:
        return {
            "resolution_hz": self.resolution_hz,
            "freqs": self.freqs.tolist(),
            "mags": self.mags.tolist(),
        }


@dataclass(frozen=True)
class StepFrequencyDecision:
    """Outcome of step-frequency selection for one window.

    frequency_hz is 0 exactly when rule is none_in_band. dominant is the
    highest-magnitude in-band peak; candidate is the lower-frequency peak
    selected by the subharmonic rule, when that rule fired.
    """

    frequency_hz: float
    rule: str
    dominant: tuple[float, float] | None = None
    candidate: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        return {
            "frequency_hz": self.frequency_hz,
            "rule": self.rule,
            "dominant": list(self.dominant) if self.dominant else None,
            "candidate": list(self.candidate) if self.candidate else None,
        }


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def fft_magnitude(signal, sample_rate_hz: float) -> Spectrum:
    """One-sided magnitude spectrum of a mean-removed, Hann-tapered signal.

    The signal is zero-padded to the next power of two at least PAD_FACTOR
    times its length, so peak positions can be refined well below the raw
    bin width. Magnitudes are scaled such that a full-scale sine of
    amplitude A peaks near A.
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise DataError("signal must be one-dimensional")
    if len(x) < MIN_SIGNAL_LEN:
        raise DataError(f"signal of {len(x)} samples is too short (minimum {MIN_SIGNAL_LEN})")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite sample in signal")
    if sample_rate_hz <= MIN_SAMPLE_RATE_HZ:
        raise DataError(
            f"sample rate {sample_rate_hz:.3g} Hz leaves no Nyquist margin over "
            f"the {GAIT_BAND_HZ[1]} Hz band edge"
        )

    padded_len = _next_pow2(PAD_FACTOR * len(x))
    freqs = np.fft.rfftfreq(padded_len, d=1.0 / sample_rate_hz)
    if np.max(x) == np.min(x):
        # constant input is pure DC; mean removal leaves exactly nothing
        mags = np.zeros(len(freqs))
    else:
        x = x - np.mean(x)
        window = np.hanning(len(x))
        spectrum = np.fft.rfft(x * window, n=padded_len)
        mags = np.abs(spectrum) * (2.0 / np.sum(window))
    return Spectrum(freqs=freqs, mags=mags, resolution_hz=sample_rate_hz / padded_len)


def _refine_peak_hz(spectrum: Spectrum, i: int) -> float:
    """Quadratic interpolation of the peak position over bins i-1, i, i+1."""
    if i <= 0 or i >= len(spectrum.mags) - 1:
        return float(spectrum.freqs[i])
    left, mid, right = spectrum.mags[i - 1], spectrum.mags[i], spectrum.mags[i + 1]
    denom = left - 2.0 * mid + right
    if denom == 0:
        return float(spectrum.freqs[i])
    delta = 0.5 * (left - right) / denom
    delta = min(0.5, max(-0.5, delta))
    return float(spectrum.freqs[i] + delta * spectrum.resolution_hz)


def select_step_frequency(
    spectrum: Spectrum,
    band: tuple[float, float] = GAIT_BAND_HZ,
    ratio: float = SUBHARMONIC_RATIO,
) -> StepFrequencyDecision:
    """Pick the window's step frequency from its magnitude spectrum.

    The dominant peak is the highest-magnitude local maximum with frequency
    inside band; with no such peak the frequency is 0. Among in-band peaks
    whose frequency is below ratio times the dominant's frequency and whose
    magnitude is at least ratio times the dominant's magnitude, the strongest
    is preferred over the dominant (subharmonic rule). Reported frequencies
    are refined by quadratic interpolation around the peak bin.
    """
    lo, hi = band
    mags = spectrum.mags
    if len(mags) < 3:
        return StepFrequencyDecision(0.0, RULE_NONE_IN_BAND)
    global_max = float(np.max(mags))
    if global_max <= 0.0:
        return StepFrequencyDecision(0.0, RULE_NONE_IN_BAND)

    interior = np.arange(1, len(mags) - 1)
    is_local_max = (mags[interior] > mags[interior - 1]) & (mags[interior] > mags[interior + 1])
    peak_idx = interior[is_local_max]
    # Noise-floor guard is relative to the global maximum, so ripple in the
    # band cannot masquerade as gait when the real energy sits out of band.
    peak_idx = peak_idx[mags[peak_idx] >= NOISE_FLOOR_FRACTION * global_max]
    # nanohertz slack so a bin sitting exactly on a band edge is not lost
    # to floating-point grid representation
    band_tol = 1e-9
    peak_idx = peak_idx[
        (spectrum.freqs[peak_idx] >= lo - band_tol)
        & (spectrum.freqs[peak_idx] <= hi + band_tol)
    ]
    if len(peak_idx) == 0:
        return StepFrequencyDecision(0.0, RULE_NONE_IN_BAND)

    def clamp_band(f: float) -> float:
        return min(hi, max(lo, f))

    peaks = [
        (clamp_band(_refine_peak_hz(spectrum, int(i))), float(mags[i])) for i in peak_idx
    ]
    dominant = max(peaks, key=lambda p: p[1])
    qualifiers = [
        p for p in peaks if p[0] < ratio * dominant[0] and p[1] >= ratio * dominant[1]
    ]
    if qualifiers:
        candidate = max(qualifiers, key=lambda p: p[1])
        return StepFrequencyDecision(
            frequency_hz=candidate[0],
            rule=RULE_SUBHARMONIC_PEAK,
            dominant=dominant,
            candidate=candidate,
        )
    return StepFrequencyDecision(
        frequency_hz=dominant[0], rule=RULE_DOMINANT_PEAK, dominant=dominant
    )
