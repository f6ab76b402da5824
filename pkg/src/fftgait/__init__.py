"""FFT-based temporospatial gait estimation from waist-worn accelerometry.

Pipeline: ingest a CSV recording, resample it to a uniform grid, derive an
activity threshold from a slow calibration walk, estimate a step frequency per
5-second window from its magnitude spectrum, predict step length from cadence
and height, and aggregate steps, distance, and velocity. A synthetic-recording
generator with analytic ground truth and a suite of method-agreement
statistics support validation.
"""

__version__ = "0.1.0"

from .agreement import (
    AgreementReport,
    AgreementThresholds,
    PairedSeries,
    bland_altman_pct,
    compare,
    lins_ccc,
    median_errors,
    passing_bablok,
)
from .calibration import (
    CalibrationProfile,
    calibrate_recording,
    compute_threshold,
    detect_step_peaks,
)
from .errors import CalibrationError, DataError, GaitError, ParseError, StatsError
from .ingest import (
    AccelRecording,
    AccelSample,
    IngestConfig,
    SubjectProfile,
    parse_recording,
    resample_uniform,
)
from .pipeline import (
    GaitSummary,
    TimeWindow,
    WindowMetrics,
    analyze_recording,
    analyze_window,
    classify_active_seconds,
    split_windows,
    summarize,
)
from .spectral import (
    GAIT_BAND_HZ,
    Spectrum,
    StepFrequencyDecision,
    fft_magnitude,
    select_step_frequency,
)
from .step_length import DEFAULT_MODEL, StepLengthModel, predict, surface_grid
from .synthgen import GaitScenario, GroundTruth, Segment, generate
