"""Regression-based step-length prediction from step frequency and height.

The model is a published fit over walking cadences in children with and
without DMD: square-root cadence, inverse square-root height, their
interaction, an intercept, and a DMD-specific adjustment block with the same
basis. Coefficients are fixed constants; this module only evaluates them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError
from .ingest import SubjectProfile


@dataclass(frozen=True)
class StepLengthPrediction:
    """Predicted step length plus flags raised during evaluation."""

    step_length_m: float
    sf_clamped: bool = False
    floored: bool = False


@dataclass(frozen=True)
class StepLengthModel:
    """Fixed-coefficient step-length regression.

    Inputs outside the fitted cadence band are clamped (flagged, never
    silent); a zero step frequency maps to zero length by convention, and
    negative regression output is floored at zero.
    """

    sqrt_sf_coef: float = 3.33758
    inv_sqrt_h_coef: float = 2.442582
    interaction_coef: float = -3.072612
    intercept: float = -2.505019
    dmd_intercept: float = 1.87948
    dmd_sqrt_sf_coef: float = -1.689478
    dmd_inv_sqrt_h_coef: float = -1.865428
    dmd_interaction_coef: float = 1.664073
    sf_clamp_hz: tuple[float, float] = (0.3, 4.6)

    def _raw(self, sf: float, height_m: float, dmd: bool) -> float:
        root_sf = math.sqrt(sf)
        inv_root_h = 1.0 / math.sqrt(height_m)
        value = (
            self.sqrt_sf_coef * root_sf
            + self.inv_sqrt_h_coef * inv_root_h
            + self.interaction_coef * root_sf * inv_root_h
            + self.intercept
        )
        if dmd:
            value += (
                self.dmd_intercept
                + self.dmd_sqrt_sf_coef * root_sf
                + self.dmd_inv_sqrt_h_coef * inv_root_h
                + self.dmd_interaction_coef * root_sf * inv_root_h
            )
        return value

    def dmd_adjustment(self, sf: float, height_m: float) -> float:
        """Difference the DMD block adds at (sf, height) relative to control."""
        return self._raw(sf, height_m, True) - self._raw(sf, height_m, False)

    def evaluate(self, sf: float, subject: SubjectProfile) -> StepLengthPrediction:
        """Predict step length in meters, reporting clamp/floor flags.

        sf = 0 is the no-motion convention and returns 0 without touching the
        regression. Otherwise sf is clamped into sf_clamp_hz before evaluation
        and a negative prediction is floored at 0; both cases raise flags.
        """
        if not math.isfinite(sf):
            raise DataError("step frequency must be finite")
        if sf < 0:
            raise DataError(f"step frequency must be nonnegative, got {sf}")
        if sf == 0.0:
            return StepLengthPrediction(0.0)
        lo, hi = self.sf_clamp_hz
        clamped_sf = min(hi, max(lo, sf))
        value = self._raw(clamped_sf, subject.height_m, subject.dmd)
        floored = value < 0.0
        return StepLengthPrediction(
            step_length_m=max(0.0, value),
            sf_clamped=clamped_sf != sf,
            floored=floored,
        )

    def predict(self, sf: float, subject: SubjectProfile) -> float:
        return self.evaluate(sf, subject).step_length_m

    def surface_grid(
        self,
        sf_range: tuple[float, float],
        h_range: tuple[float, float],
        n: int,
        dmd: bool = False,
    ) -> list[tuple[float, float, float]]:
        """Row-major (sf, h, step length) grid of n x n predictions for plotting."""
        if n < 1:
            raise DataError(f"grid size must be at least 1, got {n}")
        if sf_range[0] > sf_range[1] or h_range[0] > h_range[1]:
            raise DataError("empty grid range")
        sf_values = _linspace(sf_range[0], sf_range[1], n)
        h_values = _linspace(h_range[0], h_range[1], n)
        grid = []
        for sf in sf_values:
            for h in h_values:
                subject = SubjectProfile(height_m=h, dmd=dmd)
                grid.append((sf, h, self.predict(sf, subject)))
        return grid


def _linspace(lo: float, hi: float, n: int) -> list[float]:
    if n == 1:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


DEFAULT_MODEL = StepLengthModel()


def predict(sf: float, subject: SubjectProfile, model: StepLengthModel = DEFAULT_MODEL) -> float:
    """Step length in meters for a step frequency and subject (module-level shortcut)."""
    return model.predict(sf, subject)


def surface_grid(
    sf_range: tuple[float, float],
    h_range: tuple[float, float],
    n: int,
    dmd: bool = False,
    model: StepLengthModel = DEFAULT_MODEL,
) -> list[tuple[float, float, float]]:
    return model.surface_grid(sf_range, h_range, n, dmd)
