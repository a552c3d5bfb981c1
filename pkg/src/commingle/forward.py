"""Blur, sample and quantize; the deformation, measurement and difference matrices."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import AmplitudeOverflowError, RegimeViolation
from .signal import (
    COUNTS_PER_UNIT,
    DEFAULT_COUNT_CAP,
    BlurMixture,
    PiecewiseSignal,
    SamplingGrid,
    difference_vector,
)

FRAGILE_TOL = 1e-9
_SQRT1_2 = math.sqrt(0.5)


class FragileRoundingWarning(UserWarning):
    """A value sits within 1e-9 counts of a rounding midpoint."""


def std_normal_cdf(z: float) -> float:
    """Phi(z) through erfc, which keeps full relative precision in the lower tail."""
    if not math.isfinite(z):
        raise ValueError(f"std_normal_cdf needs a finite argument, got {z!r}")
    return 0.5 * math.erfc(-z * _SQRT1_2)


def mixture_cdf(blur: BlurMixture, x: float) -> float:
    return math.fsum(w * std_normal_cdf(x / s) for w, s in blur.components)


def blurred_value(signal: PiecewiseSignal, blur: BlurMixture, t: float) -> float:
    """Unrounded blurred signal at time ``t``, in amplitude units."""
    gd = difference_vector(signal)
    terms = (d * mixture_cdf(blur, t - b) for d, b in zip(gd, signal.breaks))
    return math.fsum(terms) / COUNTS_PER_UNIT


def _quantize(x: float, cap: int) -> tuple[int, bool]:
    scaled = x * COUNTS_PER_UNIT
    if not math.isfinite(scaled) or abs(scaled) > cap + 0.5:
        raise AmplitudeOverflowError(f"{x!r} exceeds the {cap}-count cap")
    q = round(scaled)  # half to even
    if abs(q) > cap:
        raise AmplitudeOverflowError(f"{x!r} exceeds the {cap}-count cap")
    fragile = abs(abs(scaled - math.floor(scaled)) - 0.5) < FRAGILE_TOL
    return q, fragile


def quantize(x: float, cap: int = DEFAULT_COUNT_CAP) -> int:
    """Nearest multiple of 1/256 to ``x``, returned in counts."""
    q, fragile = _quantize(x, cap)
    if fragile:
        warnings.warn(f"{x!r} is within {FRAGILE_TOL} counts of a rounding tie",
                      FragileRoundingWarning, stacklevel=2)
    return q


@dataclass(frozen=True)
class Observation:
    grid: SamplingGrid
    samples: tuple[int, ...]
    fragile: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(int(s) for s in self.samples))
        if len(self.samples) != self.grid.n:
            raise ValueError("sample count does not match the grid")


def sample(signal: PiecewiseSignal, blur: BlurMixture, grid: SamplingGrid) -> Observation:
    """Quantized samples gamma[i] of the blurred signal at t0 + i."""
    if not any(signal.amps):
        return Observation(grid, (0,) * grid.n)
    gd = difference_vector(signal)
    vals, fragile = [], []
    for i, t in enumerate(grid.times):
        x = math.fsum(d * mixture_cdf(blur, t - b) for d, b in zip(gd, signal.breaks))
        q, frag = _quantize(x / COUNTS_PER_UNIT, signal.count_cap)
        vals.append(q)
        if frag:
            fragile.append(i)
    if fragile:
        warnings.warn(f"samples {fragile} are within {FRAGILE_TOL} counts of a rounding tie",
                      FragileRoundingWarning, stacklevel=2)
    return Observation(grid, tuple(vals), tuple(fragile))


def difference_sequence(obs: Observation | Sequence[int]) -> tuple[int, ...]:
    """delta[0] = gamma[0], delta[i] = gamma[i] - gamma[i-1]."""
    g = obs.samples if isinstance(obs, Observation) else tuple(obs)
    return tuple(g[i] - (g[i - 1] if i else 0) for i in range(len(g)))


def deformation_matrix(signal: PiecewiseSignal, blur: BlurMixture, grid: SamplingGrid) -> np.ndarray:
    """N x (m+1) matrix of mixture CDF values at (t_i - D_j)."""
    out = np.empty((grid.n, signal.m + 1))
    for i, t in enumerate(grid.times):
        for j, b in enumerate(signal.breaks):
            out[i, j] = mixture_cdf(blur, t - b)
    return out


@dataclass(frozen=True)
class MeasurementMatrix:
    """Exact rational matrix M with gamma = M g_D in counts.

    ``critical`` lists the (row, column) entries left unsnapped by the
    critical-window test and solved from the data.
    """

    entries: tuple[tuple[Fraction, ...], ...]
    critical: tuple[tuple[int, int], ...] = ()

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0]) if self.entries else 0

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.entries)

    def apply(self, gd: Sequence[int]) -> tuple[Fraction, ...]:
        return tuple(sum((e * d for e, d in zip(row, gd)), Fraction(0)) for row in self.entries)

    def as_array(self) -> np.ndarray:
        return np.array([[float(e) for e in row] for row in self.entries])


@dataclass(frozen=True)
class DifferenceMatrix:
    entries: tuple[tuple[Fraction, ...], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0]) if self.entries else 0

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.entries)

    def nonzeros(self, i: int) -> list[int]:
        return [j for j, e in enumerate(self.entries[i]) if e != 0]

    def apply(self, gd: Sequence[int]) -> tuple[Fraction, ...]:
        return tuple(sum((e * d for e, d in zip(row, gd)), Fraction(0)) for row in self.entries)

    def as_array(self) -> np.ndarray:
        return np.array([[float(e) for e in row] for row in self.entries])


def measurement_matrix(
    signal: PiecewiseSignal,
    blur: BlurMixture,
    grid: SamplingGrid,
    obs: Observation,
) -> MeasurementMatrix:
    """Snap entries outside the critical windows to 0/1 and solve the rest from gamma.

    An entry (i, j) is snapped to 1 when t_i - D_j > nu_j * sigma_max and to
    0 when t_i - D_j < -nu_j * sigma_max. At most one entry per row may be
    left; it is solved exactly so that every row reproduces gamma[i].
    """
    from .regime import prop1_holds, regime_profile

    gd = difference_vector(signal)
    profile = regime_profile(gd)
    if not prop1_holds(blur, profile):
        raise RegimeViolation(
            f"sigma_max={blur.sigma_max:.6g} is not below 0.5T/nu_max={profile.sigma_bound:.6g}")
    sigma = blur.sigma_max
    one, zero = Fraction(1), Fraction(0)
    rows, critical = [], []
    for i, t in enumerate(grid.times):
        row: list[Fraction | None] = []
        known = 0
        for j, b in enumerate(signal.breaks):
            half = profile.nus[j] * sigma
            if t - b > half:
                row.append(one)
                known += gd[j]
            elif t - b < -half:
                row.append(zero)
            else:
                row.append(None)
        open_cols = [j for j, e in enumerate(row) if e is None]
        if len(open_cols) > 1:
            raise RegimeViolation(f"row {i} has {len(open_cols)} entries inside critical windows")
        if open_cols:
            j = open_cols[0]
            row[j] = Fraction(obs.samples[i] - known, gd[j])
            critical.append((i, j))
        elif known != obs.samples[i]:
            raise RegimeViolation(
                f"row {i}: snapped entries give {known} counts but the sample is {obs.samples[i]}")
        rows.append(tuple(row))
    return MeasurementMatrix(tuple(rows), tuple(critical))


def difference_matrix(M: MeasurementMatrix) -> DifferenceMatrix:
    rows = M.entries
    out = [rows[0]] if rows else []
    for i in range(1, len(rows)):
        out.append(tuple(a - b for a, b in zip(rows[i], rows[i - 1])))
    return DifferenceMatrix(tuple(out))
