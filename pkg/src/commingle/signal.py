"""Exact signal, blur and sampling-grid values.

Amplitudes are integers in counts (1/256 of an amplitude unit). Times are
floats in units of the sampling interval T; T itself is carried on the grid
only as metadata, because every relation used here is scale free in T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import InvalidSignalError

COUNTS_PER_UNIT = 256
DEFAULT_COUNT_CAP = 2**16
# sample/discontinuity coincidence tolerance, in units of T
TIME_TOL = 1e-9
COMMINGLING_MIN_GAP = 1.5


def to_amplitude(counts: int) -> float:
    return counts / COUNTS_PER_UNIT


@dataclass(frozen=True)
class PiecewiseSignal:
    """Spatially limited piecewise constant signal.

    ``breaks`` holds D_0..D_m and ``amps`` holds g_1..g_m; the signal is
    g_j on [D_{j-1}, D_j) and zero outside [D_0, D_m).
    """

    breaks: tuple[float, ...]
    amps: tuple[int, ...]
    count_cap: int = DEFAULT_COUNT_CAP

    def __post_init__(self) -> None:
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        for a in self.amps:
            if isinstance(a, bool) or not isinstance(a, int):
                raise InvalidSignalError(f"amplitude {a!r} is not an integer count")
        object.__setattr__(self, "amps", tuple(self.amps))
        if len(self.breaks) != len(self.amps) + 1:
            raise InvalidSignalError("need exactly one more break than amplitudes")
        if not self.amps:
            raise InvalidSignalError("signal needs at least one region")

    @property
    def m(self) -> int:
        return len(self.amps)

    @property
    def levels(self) -> tuple[int, ...]:
        """g_0..g_{m+1}, including the implicit zero levels."""
        return (0, *self.amps, 0)

    @property
    def min_gap(self) -> float:
        return min(b - a for a, b in zip(self.breaks, self.breaks[1:]))


@dataclass(frozen=True)
class BlurMixture:
    """Weighted mixture of zero-mean Gaussians; sigmas in units of T."""

    components: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        comps = tuple((float(w), float(s)) for w, s in self.components)
        if not comps:
            raise InvalidSignalError("blur needs at least one component")
        for w, s in comps:
            if not (w > 0 and s > 0 and math.isfinite(w) and math.isfinite(s)):
                raise InvalidSignalError(f"bad blur component (weight={w}, sigma={s})")
        if abs(math.fsum(w for w, _ in comps) - 1.0) > 1e-12:
            raise InvalidSignalError("blur weights must sum to 1")
        object.__setattr__(self, "components", comps)

    @classmethod
    def gaussian(cls, sigma: float) -> "BlurMixture":
        return cls(((1.0, sigma),))

    @property
    def sigma_max(self) -> float:
        return max(s for _, s in self.components)


@dataclass(frozen=True)
class SamplingGrid:
    """Uniform grid t_i = t0 + i (units of T), i = 0..n-1."""

    t0: float
    n: int
    T: float = 1.0

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise InvalidSignalError("sampling interval must be positive")
        if self.n < 1:
            raise InvalidSignalError("grid needs at least one sample")

    def time(self, i: int) -> float:
        return self.t0 + i

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(self.t0 + i for i in range(self.n))


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _near_integer(x: float, tol: float = TIME_TOL) -> bool:
    return abs(x - round(x)) < tol


def validate_signal(
    signal: PiecewiseSignal,
    grid: SamplingGrid | None = None,
    *,
    commingling: bool = False,
) -> ValidationReport:
    """Collect every violated invariant of ``signal`` (and ``grid``, if given).

    With ``commingling=True`` the minimum break distance must also exceed
    1.5 T, the regime in which only the three-token fusion can occur.
    """
    out: list[str] = []
    b, g = signal.breaks, signal.amps
    if b[0] != 0.0:
        out.append("D_0 = 0")
    if any(not math.isfinite(x) for x in b):
        out.append("breaks finite")
    if any(y <= x for x, y in zip(b, b[1:])):
        out.append("breaks strictly increasing")
    if g[0] == 0:
        out.append("g_1 ≠ 0")
    if g[-1] == 0:
        out.append("g_m ≠ 0")
    for j in range(len(g) - 1):
        if g[j] == g[j + 1]:
            out.append(f"g_{j + 1} ≠ g_{j + 2}")
    if any(abs(a) > signal.count_cap for a in g):
        out.append(f"|g_j| ≤ {signal.count_cap} counts")
    for j in range(len(b)):
        for k in range(j + 1, len(b)):
            if _near_integer(b[k] - b[j]):
                out.append(f"integer multiple of T gap between D_{j} and D_{k}")
    if commingling and len(b) > 1 and signal.min_gap <= COMMINGLING_MIN_GAP:
        out.append("min gap > 1.5T")
    if grid is not None:
        if not grid.t0 < 0:
            out.append("t0 < 0")
        if not grid.time(grid.n - 1) > b[-1]:
            out.append("t0 + (N-1)T > D_m")
        for i, t in enumerate(grid.times):
            for j, d in enumerate(b):
                if abs(t - d) < TIME_TOL:
                    out.append(f"sample {i} coincides with D_{j}")
    return ValidationReport(tuple(out))


def difference_vector(signal: PiecewiseSignal) -> tuple[int, ...]:
    """g_D = (g_1 - g_0, ..., g_{m+1} - g_m) in counts."""
    report = validate_signal(signal)
    if not report.ok:
        raise InvalidSignalError("; ".join(report.violations))
    lv = signal.levels
    return tuple(lv[j + 1] - lv[j] for j in range(len(lv) - 1))


def amplitudes_from_steps(steps: Sequence[int]) -> tuple[int, ...]:
    """Cumulative sums g_1..g_m of a difference vector, starting from g_0 = 0."""
    out, acc = [], 0
    for s in steps[:-1]:
        acc += s
        out.append(acc)
    return tuple(out)
