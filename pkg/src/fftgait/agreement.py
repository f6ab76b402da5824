"""Method-comparison statistics for paired estimate/reference series.

Implements percent-difference Bland-Altman analysis, Passing-Bablok robust
regression with rank-based confidence bounds, Lin's concordance correlation
coefficient, and median absolute (percent) error with interquartile range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import StatsError

Z_95 = 1.96
DEFAULT_MIN_PAIRS_PB = 10


@dataclass(frozen=True)
class PairedSeries:
    """Equal-length estimate and reference vectors for one metric."""

    est: np.ndarray
    ref: np.ndarray
    label: str = ""
    units: str = ""

    def __post_init__(self):
        object.__setattr__(self, "est", np.asarray(self.est, dtype=float))
        object.__setattr__(self, "ref", np.asarray(self.ref, dtype=float))
        if len(self.est) != len(self.ref):
            raise StatsError(
                f"length mismatch: {len(self.est)} estimates vs {len(self.ref)} references"
            )
        if len(self.est) < 3:
            raise StatsError(f"need at least 3 pairs, got {len(self.est)}")
        if not (np.all(np.isfinite(self.est)) and np.all(np.isfinite(self.ref))):
            raise StatsError("non-finite value in paired series")
        self.est.setflags(write=False)
        self.ref.setflags(write=False)

    def __len__(self) -> int:
        return len(self.est)


@dataclass(frozen=True)
class BlandAltmanResult:
    mean_pct_diff: float
    ci95_lo: float
    ci95_hi: float
    loa_lo: float
    loa_hi: float

    def to_dict(self) -> dict:
        return {
            "mean_pct_diff": self.mean_pct_diff,
            "ci95": [self.ci95_lo, self.ci95_hi],
            "limits_of_agreement": [self.loa_lo, self.loa_hi],
        }


@dataclass(frozen=True)
class PassingBablokResult:
    slope: float
    slope_ci95: tuple[float, float]
    intercept: float
    intercept_ci95: tuple[float, float]
    n_slopes: int

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "slope_ci95": list(self.slope_ci95),
            "intercept": self.intercept,
            "intercept_ci95": list(self.intercept_ci95),
        }


@dataclass(frozen=True)
class QuartileStat:
    median: float
    q1: float
    q3: float

    def to_dict(self) -> dict:
        return {"median": self.median, "q1": self.q1, "q3": self.q3}


@dataclass(frozen=True)
class AgreementThresholds:
    """Pass/fail policy for the report flags; all values overridable."""

    slope_range: tuple[float, float] = (0.9, 1.1)
    intercept_max_pct_of_ref: float = 2.0
    ccc_strong: float = 0.95
    ccc_acceptable: float = 0.90


@dataclass(frozen=True)
class AgreementReport:
    """All agreement statistics for one estimate/reference comparison."""

    label: str
    units: str
    n: int
    ba: BlandAltmanResult
    pb: PassingBablokResult
    ccc: float
    mdae: QuartileStat
    mdape: QuartileStat
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "units": self.units,
            "n": self.n,
            "bland_altman": self.ba.to_dict(),
            "passing_bablok": self.pb.to_dict(),
            "ccc": self.ccc,
            "mdae": self.mdae.to_dict(),
            "mdape": self.mdape.to_dict(),
            "flags": self.flags,
        }


def bland_altman_pct(s: PairedSeries) -> BlandAltmanResult:
    """Percent-difference Bland-Altman analysis.

    Each pair's difference is expressed as a percentage of the pair mean, so
    error that grows with the size of the measurement (steps accumulate) stays
    comparable across magnitudes. Limits of agreement are mean +/- 1.96 sample
    standard deviations; the CI is the 95% interval of the mean itself.
    """
    pair_means = (s.est + s.ref) / 2.0
    if np.any(pair_means == 0):
        raise StatsError("pair with zero mean: percent difference undefined")
    d = 100.0 * (s.est - s.ref) / pair_means
    mean = float(np.mean(d))
    sd = float(np.std(d, ddof=1))
    half_ci = Z_95 * sd / math.sqrt(len(d))
    return BlandAltmanResult(
        mean_pct_diff=mean,
        ci95_lo=mean - half_ci,
        ci95_hi=mean + half_ci,
        loa_lo=mean - Z_95 * sd,
        loa_hi=mean + Z_95 * sd,
    )


def passing_bablok(s: PairedSeries, min_pairs: int = DEFAULT_MIN_PAIRS_PB) -> PassingBablokResult:
    """Passing-Bablok regression of reference on estimate.

    The slope is the shifted median of all pairwise slopes (slopes of exactly
    -1 discarded, median position offset by the count of slopes below -1);
    pairs with equal estimates are skipped. Confidence bounds come from the
    rank-based order statistics of the sorted slopes. The estimate is on the
    x axis, so agreement reads as slope 1, intercept 0.
    """
    n = len(s)
    if n < min_pairs:
        raise StatsError(f"need at least {min_pairs} pairs for regression, got {n}")
    x, y = s.est, s.ref
    i, j = np.triu_indices(n, k=1)
    dx = x[j] - x[i]
    keep = dx != 0
    if not np.any(keep):
        raise StatsError("all estimate values identical: slopes undefined")
    slopes = (y[j] - y[i])[keep] / dx[keep]
    slopes = slopes[slopes != -1.0]
    if len(slopes) == 0:
        raise StatsError("no valid pairwise slopes")
    offset = int(np.sum(slopes < -1.0))
    slopes = np.sort(slopes)
    n_slopes = len(slopes)

    slope = _shifted_median(slopes, offset)

    half_width = Z_95 * math.sqrt(n * (n - 1) * (2 * n + 5) / 18.0)
    m1 = int(round((n_slopes - half_width) / 2.0))
    m2 = n_slopes - m1 + 1
    lo_idx = min(max(m1 + offset, 1), n_slopes) - 1
    hi_idx = min(max(m2 + offset, 1), n_slopes) - 1
    slope_lo = float(slopes[lo_idx])
    slope_hi = float(slopes[hi_idx])

    intercept = float(np.median(y - slope * x))
    intercept_lo = float(np.median(y - slope_hi * x))
    intercept_hi = float(np.median(y - slope_lo * x))
    return PassingBablokResult(
        slope=slope,
        slope_ci95=(slope_lo, slope_hi),
        intercept=intercept,
        intercept_ci95=(intercept_lo, intercept_hi),
        n_slopes=n_slopes,
    )


def _shifted_median(sorted_values: np.ndarray, offset: int) -> float:
    n = len(sorted_values)
    if n % 2 == 1:
        pos = (n + 1) // 2 + offset
        return float(sorted_values[min(max(pos, 1), n) - 1])
    lo = min(max(n // 2 + offset, 1), n) - 1
    hi = min(max(n // 2 + 1 + offset, 1), n) - 1
    return float(0.5 * (sorted_values[lo] + sorted_values[hi]))


def lins_ccc(s: PairedSeries) -> float:
    """Lin's concordance correlation coefficient with population moments."""
    x, y = s.est, s.ref
    mx, my = float(np.mean(x)), float(np.mean(y))
    var_x = float(np.mean((x - mx) ** 2))
    var_y = float(np.mean((y - my) ** 2))
    if var_x == 0 or var_y == 0:
        raise StatsError("zero variance: concordance undefined")
    cov = float(np.mean((x - mx) * (y - my)))
    return 2.0 * cov / (var_x + var_y + (mx - my) ** 2)


def median_errors(s: PairedSeries) -> tuple[QuartileStat, QuartileStat]:
    """Median absolute error and median absolute percent error, with IQRs.

    Quartiles use linear interpolation between order statistics. Percent error
    is relative to the reference, which must be nonzero throughout.
    """
    abs_err = np.abs(s.est - s.ref)
    mdae = _quartiles(abs_err)
    if np.any(s.ref == 0):
        raise StatsError("zero reference value: percent error undefined")
    pct_err = 100.0 * abs_err / np.abs(s.ref)
    mdape = _quartiles(pct_err)
    return mdae, mdape


def _quartiles(values: np.ndarray) -> QuartileStat:
    q1, med, q3 = np.percentile(values, [25, 50, 75])
    return QuartileStat(median=float(med), q1=float(q1), q3=float(q3))


def compare(
    s: PairedSeries,
    thresholds: AgreementThresholds = AgreementThresholds(),
    min_pairs_pb: int = DEFAULT_MIN_PAIRS_PB,
) -> AgreementReport:
    """Run the full battery of agreement statistics and evaluate flags."""
    ba = bland_altman_pct(s)
    pb = passing_bablok(s, min_pairs=min_pairs_pb)
    ccc = lins_ccc(s)
    mdae, mdape = median_errors(s)
    max_ref = float(np.max(np.abs(s.ref)))
    flags = {
        "pb_slope_ci_includes_1": pb.slope_ci95[0] <= 1.0 <= pb.slope_ci95[1],
        "pb_intercept_ci_includes_0": pb.intercept_ci95[0] <= 0.0 <= pb.intercept_ci95[1],
        "pb_slope_acceptable": thresholds.slope_range[0] <= pb.slope <= thresholds.slope_range[1],
        "pb_intercept_acceptable": abs(pb.intercept)
        <= thresholds.intercept_max_pct_of_ref / 100.0 * max_ref,
        "ccc_strong": ccc > thresholds.ccc_strong,
        "ccc_acceptable": ccc >= thresholds.ccc_acceptable,
    }
    return AgreementReport(
        label=s.label,
        units=s.units,
        n=len(s),
        ba=ba,
        pb=pb,
        ccc=ccc,
        mdae=mdae,
        mdape=mdape,
        flags=flags,
    )
