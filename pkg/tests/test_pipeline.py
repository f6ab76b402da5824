import numpy as np
import pytest

from fftgait.calibration import CalibrationProfile
from fftgait.errors import DataError
from fftgait.ingest import AccelRecording, SubjectProfile
from fftgait.pipeline import (
    GaitSummary,
    TimeWindow,
    WindowMetrics,
    analyze_recording,
    analyze_window,
    classify_active_seconds,
    split_windows,
    summarize,
)
from fftgait.step_length import DEFAULT_MODEL
from fftgait.synthgen import GaitScenario, Segment, generate

FS = 100.0
THRESHOLD_HALF = CalibrationProfile.explicit(0.5, "g")


def make_rec(duration_s, z=None, fs=FS):
    n = int(round(duration_s * fs))
    t = np.arange(n) / fs
    if z is None:
        z = np.sin(2 * np.pi * 2.0 * t)
    zeros = np.zeros(n)
    return AccelRecording(t=t, x=zeros, y=zeros, z=np.asarray(z), sample_rate_hz=fs)


def make_window(samples, fs=FS, units="g", index=0):
    samples = np.asarray(samples, dtype=float)
    return TimeWindow(
        index=index,
        t_start=0.0,
        t_end=len(samples) / fs,
        duration_s=len(samples) / fs,
        samples=samples,
        sample_rate_hz=fs,
        units=units,
    )


def tone_window(f0, seconds=5.0, amp=1.0, fs=FS):
    t = np.arange(int(seconds * fs)) / fs
    return make_window(amp * np.sin(2 * np.pi * f0 * t), fs=fs)


class TestSplitWindows:
    def test_exact_division(self):
        windows = split_windows(make_rec(60.0))
        assert len(windows) == 12
        assert all(w.duration_s == pytest.approx(5.0) for w in windows)

    def test_tail_kept_when_long_enough(self):
        windows = split_windows(make_rec(23.0))
        assert len(windows) == 5
        assert windows[-1].duration_s == pytest.approx(3.0)

    def test_tail_dropped_when_short(self):
        windows = split_windows(make_rec(21.0))
        assert len(windows) == 4
        assert sum(w.duration_s for w in windows) == pytest.approx(20.0)

    def test_recording_too_short(self):
        with pytest.raises(DataError, match="shorter"):
            split_windows(make_rec(1.5))

    def test_requires_uniform(self):
        rec = AccelRecording(t=[0.0, 0.5, 0.7], x=[0] * 3, y=[0] * 3, z=[0] * 3)
        with pytest.raises(DataError, match="uniform"):
            split_windows(rec)

    def test_tiling_no_gaps(self):
        windows = split_windows(make_rec(37.0))
        assert windows[0].t_start == 0.0
        for prev, cur in zip(windows, windows[1:]):
            assert cur.t_start == pytest.approx(prev.t_end, abs=1e-12)
            assert cur.index == prev.index + 1

    def test_samples_are_mean_removed(self):
        rec = make_rec(10.0, z=np.full(1000, 2.5))
        windows = split_windows(rec)
        for w in windows:
            assert np.all(w.samples == 0.0)


class TestClassifyActiveSeconds:
    def spikes(self, maxima, fs=FS):
        # one spike per second at mid-second, zero elsewhere
        samples = np.zeros(int(len(maxima) * fs))
        for k, m in enumerate(maxima):
            samples[int(k * fs + fs // 2)] = m
        return make_window(samples, fs=fs)

    def test_mixed_window(self):
        window = self.spikes([1.6, 1.2, 1.7, 1.4, 2.0])
        active, mask = classify_active_seconds(window, CalibrationProfile.explicit(1.5, "g"))
        assert mask == [True, False, True, False, True]
        assert active == 3

    def test_all_quiet(self):
        window = self.spikes([0.2, 0.3, 0.1, 0.2, 0.3])
        active, mask = classify_active_seconds(window, CalibrationProfile.explicit(1.5, "g"))
        assert active == 0

    def test_boundary_equals_threshold_is_active(self):
        window = self.spikes([1.5] * 5)
        active, _ = classify_active_seconds(window, CalibrationProfile.explicit(1.5, "g"))
        assert active == 5

    def test_negative_excursions_count(self):
        window = self.spikes([-2.0, 0.1, -2.0, 0.1, -2.0])
        active, mask = classify_active_seconds(window, CalibrationProfile.explicit(1.5, "g"))
        assert mask == [True, False, True, False, True]

    def test_half_second_fragment_is_own_interval(self):
        window = make_window(np.zeros(350))  # 3.5 s at 100 Hz
        _, mask = classify_active_seconds(window, THRESHOLD_HALF)
        assert len(mask) == 4

    def test_small_fragment_folds_into_last_second(self):
        window = make_window(np.zeros(301))  # 3.01 s
        _, mask = classify_active_seconds(window, THRESHOLD_HALF)
        assert len(mask) == 3

    def test_folded_fragment_can_activate_last_second(self):
        samples = np.zeros(301)
        samples[300] = 9.0
        _, mask = classify_active_seconds(make_window(samples), THRESHOLD_HALF)
        assert mask == [False, False, True]

    def test_unit_mismatch(self):
        window = make_window(np.zeros(500), units="ms2")
        with pytest.raises(DataError, match="unit mismatch"):
            classify_active_seconds(window, THRESHOLD_HALF)


class TestAnalyzeWindow:
    def test_tone_fully_active(self):
        subject = SubjectProfile(1.3)
        m = analyze_window(tone_window(2.0), THRESHOLD_HALF, subject)
        assert m.active_s == 5
        assert m.step_frequency_hz == pytest.approx(2.0, abs=0.05)
        assert m.steps == pytest.approx(10.0, abs=0.25)
        assert m.step_length_m == pytest.approx(0.546212, abs=1e-3)
        assert m.distance_m == pytest.approx(5.462, abs=0.05)
        assert m.velocity_mps == pytest.approx(1.092, abs=0.01)
        assert not m.sf_clamped and not m.sl_floored

    def test_quiet_window_all_zero(self):
        subject = SubjectProfile(1.3)
        m = analyze_window(make_window(np.zeros(500)), THRESHOLD_HALF, subject)
        assert m.active_s == 0
        assert m.step_frequency_hz == 0.0
        assert m.steps == 0.0
        assert m.distance_m == 0.0
        assert m.velocity_mps == 0.0

    def test_partially_active_window(self):
        # tone in the first 3 s, silence after: steps scale with active time
        t = np.arange(500) / FS
        z = np.where(t < 3.0, np.sin(2 * np.pi * 2.0 * t), 0.0)
        m = analyze_window(make_window(z), THRESHOLD_HALF, SubjectProfile(1.3))
        assert m.active_s == 3
        assert m.steps == pytest.approx(6.0, abs=0.25)
        assert m.velocity_mps == pytest.approx(m.distance_m / 3.0, rel=1e-12)

    def test_active_but_no_frequency_gives_zero_metrics(self):
        # a single sharp spike exceeds the threshold but has no gait-band peak
        samples = np.zeros(500)
        samples[250] = 10.0
        m = analyze_window(make_window(samples), THRESHOLD_HALF, SubjectProfile(1.3))
        assert m.active_s >= 1
        if m.step_frequency_hz == 0.0:
            assert m.steps == 0.0 and m.distance_m == 0.0 and m.velocity_mps == 0.0

    def test_product_invariants(self):
        m = analyze_window(tone_window(3.0), THRESHOLD_HALF, SubjectProfile(1.2))
        assert m.steps == pytest.approx(m.step_frequency_hz * m.active_s, rel=1e-12)
        assert m.distance_m == pytest.approx(m.steps * m.step_length_m, rel=1e-12)


class TestSummarize:
    def metric(self, index, steps, active_s=5, duration=5.0, sl=0.546):
        sf = steps / active_s if active_s else 0.0
        distance = steps * sl
        return WindowMetrics(
            index=index,
            t_start=index * duration,
            duration_s=duration,
            active_s=active_s,
            second_mask=tuple([active_s > 0] * 5),
            step_frequency_hz=sf,
            rule="dominant_peak" if sf else "none_in_band",
            steps=steps,
            step_length_m=sl if steps else 0.0,
            distance_m=distance,
            velocity_mps=distance / active_s if active_s else 0.0,
        )

    def test_twelve_identical_windows(self):
        metrics = [self.metric(i, steps=10.0) for i in range(12)]
        s = summarize(metrics)
        assert s.total_steps == pytest.approx(120.0)
        assert s.total_steps_rounded == 120
        assert s.total_distance_m == pytest.approx(65.52, abs=0.1)
        assert s.avg_step_velocity_mps == pytest.approx(1.092, abs=0.01)
        assert s.avg_step_length_m == pytest.approx(0.546, abs=1e-9)
        assert s.total_duration_s == pytest.approx(60.0)
        assert s.active_duration_s == pytest.approx(60.0)

    def test_quiet_windows_dilute_averages(self):
        # frequency averages over total time, not just active time
        metrics = [self.metric(0, steps=10.0), self.metric(1, steps=0.0, active_s=0)]
        s = summarize(metrics)
        assert s.avg_step_frequency_hz == pytest.approx(10.0 / 10.0)
        assert s.total_duration_s == 10.0
        assert s.active_duration_s == 5.0

    def test_single_window_identity(self):
        m = self.metric(0, steps=10.0)
        s = summarize([m])
        assert s.total_duration_s == pytest.approx(5.0)
        assert s.total_steps == pytest.approx(m.steps)
        assert s.avg_step_velocity_mps == pytest.approx(m.velocity_mps)

    def test_round_half_up(self):
        s = summarize([self.metric(0, steps=2.5)])
        assert s.total_steps_rounded == 3
        s = summarize([self.metric(0, steps=0.5)])
        assert s.total_steps_rounded == 1
        s = summarize([self.metric(0, steps=2.4)])
        assert s.total_steps_rounded == 2

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            summarize([])

    def test_p95_over_active_windows_only(self):
        metrics = [self.metric(i, steps=float(i + 1)) for i in range(10)]
        metrics.append(self.metric(10, steps=0.0, active_s=0))
        s = summarize(metrics)
        velocities = [m.velocity_mps for m in metrics if m.active_s > 0]
        assert s.p95_velocity_mps == pytest.approx(np.percentile(velocities, 95))

    def test_all_quiet_p95_zero(self):
        metrics = [self.metric(i, steps=0.0, active_s=0) for i in range(3)]
        assert summarize(metrics).p95_velocity_mps == 0.0


class TestAnalyzeRecording:
    def run_scenario(self, scenario, threshold=1.0):
        rec, truth = generate(scenario)
        cal = CalibrationProfile.explicit(threshold, rec.units)
        metrics, summary = analyze_recording(rec, cal, SubjectProfile(1.3))
        return rec, truth, metrics, summary

    def test_end_to_end_step_recovery(self):
        scenario = GaitScenario(
            segments=(
                Segment(30.0, 1.6, amplitude=2.0),
                Segment(10.0, 0.0),
                Segment(20.0, 3.0, amplitude=2.0),
            ),
            sample_rate_hz=100.0,
            noise_amplitude=0.3,
            seed=42,
        )
        _, truth, metrics, summary = self.run_scenario(scenario)
        assert abs(summary.total_steps - truth.total_steps) / truth.total_steps < 0.02
        assert summary.active_duration_s == pytest.approx(truth.active_duration_s)

    def test_window_frequencies_match_schedule(self):
        scenario = GaitScenario(
            segments=(Segment(20.0, 1.2, amplitude=2.0), Segment(15.0, 2.8, amplitude=2.0)),
            sample_rate_hz=100.0,
            seed=9,
        )
        _, truth, metrics, _ = self.run_scenario(scenario)
        assert len(metrics) == len(truth.window_frequencies)
        for m, expected in zip(metrics, truth.window_frequencies):
            if expected > 0:
                assert abs(m.step_frequency_hz - expected) <= 0.05

    def test_aggregation_identities(self):
        scenario = GaitScenario(
            segments=(Segment(25.0, 2.0, amplitude=2.0), Segment(13.0, 0.0)),
            sample_rate_hz=100.0,
            noise_amplitude=0.2,
            seed=5,
        )
        _, _, metrics, summary = self.run_scenario(scenario)
        total_d = sum(m.distance_m for m in metrics)
        assert abs(summary.total_distance_m - total_d) <= 1e-9 * max(1.0, total_d)
        assert summary.avg_step_frequency_hz == pytest.approx(
            summary.total_steps / summary.total_duration_s, rel=1e-12
        )
        assert summary.active_duration_s <= summary.total_duration_s
        assert summary.avg_step_velocity_mps <= max(m.velocity_mps for m in metrics) + 1e-12
        assert sum(w.duration_s for w in metrics) == pytest.approx(
            summary.total_duration_s, rel=1e-12
        )

    def test_unit_mismatch_rejected(self):
        rec, _ = generate(GaitScenario(segments=(Segment(10.0, 2.0),), seed=0))
        cal = CalibrationProfile.explicit(0.5, "ms2")
        with pytest.raises(DataError, match="unit mismatch"):
            analyze_recording(rec, cal, SubjectProfile(1.3))

    def test_subharmonic_heavy_signal_reports_fundamental(self):
        # strong second harmonic must not displace the cadence estimate
        scenario = GaitScenario(
            segments=(Segment(30.0, 1.8, amplitude=2.0, harmonic2_ratio=0.7),),
            sample_rate_hz=100.0,
            seed=12,
        )
        _, truth, metrics, summary = self.run_scenario(scenario)
        for m in metrics:
            assert m.step_frequency_hz == pytest.approx(1.8, abs=0.05)
        assert abs(summary.total_steps - truth.total_steps) / truth.total_steps < 0.02
