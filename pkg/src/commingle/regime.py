"""Critical-window thresholds and empirical checks of the low-blur structure results."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import RegimeViolation
from .signal import BlurMixture, PiecewiseSignal, SamplingGrid

NU_TOL = 1e-13
_HALF = Fraction(1, 2)


def _upper_tail(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


@functools.lru_cache(maxsize=None)
def nu(step: int) -> float:
    """Solve Phi(nu) = 1 - 1/(512 |step|), with ``step`` in counts.

    In counts the right-hand side is 1 - 1/(2|step|); the upper tail form
    1 - Phi(nu) = 1/(2|step|) is bisected directly to avoid cancellation.
    """
    c = abs(int(step))
    if c == 0:
        raise ValueError("nu is undefined for a zero step")
    if c == 1:
        return 0.0
    target = 1.0 / (2 * c)
    lo, hi = 0.0, 40.0
    while hi - lo > NU_TOL:
        mid = 0.5 * (lo + hi)
        if _upper_tail(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class RegimeProfile:
    nus: tuple[float, ...]

    @property
    def nu_max(self) -> float:
        return max(self.nus)

    @property
    def sigma_bound(self) -> float:
        """0.5 T / nu_max; unbounded when every step is a single count."""
        return math.inf if self.nu_max == 0 else 0.5 / self.nu_max


def regime_profile(gd: Sequence[int]) -> RegimeProfile:
    return RegimeProfile(tuple(nu(d) for d in gd))


def prop1_holds(blur: BlurMixture, profile: RegimeProfile) -> bool:
    return blur.sigma_max < profile.sigma_bound


@dataclass(frozen=True)
class SegmentationInfo:
    """Sample counts per region and segmentation-point indices.

    ``etas[0]`` counts samples before D_0, ``etas[j]`` those in (D_{j-1}, D_j)
    and ``etas[m+1]`` those after D_m; ``iotas[j]`` is the index of the first
    sample after D_j.
    """

    etas: tuple[int, ...]
    iotas: tuple[int, ...]


def segmentation(signal: PiecewiseSignal, grid: SamplingGrid) -> SegmentationInfo:
    times = grid.times
    iotas = tuple(sum(1 for t in times if t < b) for b in signal.breaks)
    etas = (iotas[0], *(b - a for a, b in zip(iotas, iotas[1:])), grid.n - iotas[-1])
    return SegmentationInfo(etas, iotas)


EXACT_STEP = "EXACT_STEP"
LATE_CRITICAL = "LATE_CRITICAL"
EARLY_CRITICAL = "EARLY_CRITICAL"


@dataclass(frozen=True)
class ColumnForm:
    tag: str
    critical_row: int | None = None
    critical_value: Fraction | None = None


def _all(col, rows, value) -> bool:
    return all(col[i] == value for i in rows)


def classify_column(M, j: int, seg: SegmentationInfo) -> ColumnForm:
    """Match column ``j`` of the measurement matrix against the three step forms."""
    col = M.column(j)
    n = len(col)
    k = seg.iotas[j]
    if _all(col, range(k), 0) and _all(col, range(k, n), 1):
        return ColumnForm(EXACT_STEP)
    if k < n and _all(col, range(k), 0) and _all(col, range(k + 1, n), 1) and _HALF < col[k] < 1:
        return ColumnForm(LATE_CRITICAL, k, col[k])
    if k >= 1 and _all(col, range(k - 1), 0) and _all(col, range(k, n), 1) and 0 < col[k - 1] < _HALF:
        return ColumnForm(EARLY_CRITICAL, k - 1, col[k - 1])
    raise RegimeViolation(f"column {j} matches none of the three step forms")


@dataclass
class CheckReport:
    name: str
    applicable: bool = True
    violations: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"name": self.name, "applicable": self.applicable, "ok": self.ok,
                "violations": list(self.violations), "notes": list(self.notes)}


def is_critical(entry: Fraction, step: int) -> bool:
    """Entry is farther than 1/(2|step|) (one half count of the step) from both 0 and 1."""
    # integer form of |e| > 1/(2|s|) and |1 - e| > 1/(2|s|) for e = p/q, q > 0
    p, q, s2 = entry.numerator, entry.denominator, 2 * abs(step)
    return s2 * abs(p) > q and s2 * abs(q - p) > q


def check_corollary2(M, seg: SegmentationInfo) -> CheckReport:
    """Every column of M is an exact, late-critical or early-critical step."""
    rep = CheckReport("corollary2")
    for j in range(M.shape[1]):
        try:
            classify_column(M, j, seg)
        except RegimeViolation as exc:
            rep.violations.append(str(exc))
    return rep


def check_prop3(M, gd: Sequence[int], MD=None, min_gap: float | None = None) -> CheckReport:
    """At most one critical entry per row of M; one nonzero per M_D row once gaps exceed 2T."""
    rep = CheckReport("prop3")
    for i, row in enumerate(M.entries):
        crit = [j for j, e in enumerate(row) if is_critical(e, gd[j])]
        if len(crit) > 1:
            rep.violations.append(f"row {i} has critical values in columns {crit}")
    if MD is not None and min_gap is not None and min_gap > 2.0:
        for i in range(MD.shape[0]):
            nz = MD.nonzeros(i)
            if len(nz) > 1:
                rep.violations.append(f"difference-matrix row {i} has nonzeros {nz} with min gap > 2T")
    return rep


def check_prop4(seg: SegmentationInfo, l: int, min_gap: float) -> CheckReport:
    """No l+1 consecutive indices are all segmentation points when gaps exceed (l+1)T/l."""
    rep = CheckReport(f"prop4(l={l})")
    if not min_gap > (l + 1) / l:
        rep.applicable = False
        rep.notes.append(f"min gap {min_gap:.6g} does not exceed {(l + 1) / l:.6g}T; skipped")
        return rep
    points = set(seg.iotas)
    for start in points:
        if all(start + d in points for d in range(l + 1)):
            rep.violations.append(f"indices {start}..{start + l} are all segmentation points")
    return rep


def check_prop5(MD, min_gap: float) -> CheckReport:
    """M_D rows have at most two nonzeros, in adjacent columns, both in (0, 0.5) above 1.5T gaps."""
    rep = CheckReport("prop5")
    for i in range(MD.shape[0]):
        nz = MD.nonzeros(i)
        if len(nz) > 2:
            rep.violations.append(f"row {i} has {len(nz)} nonzeros")
        elif len(nz) == 2:
            a, b = (MD.entries[i][j] for j in nz)
            if nz[1] != nz[0] + 1:
                rep.violations.append(f"row {i} nonzeros {nz} are not consecutive columns")
            if not (0 < a < 1 or 0 < b < 1):
                rep.violations.append(f"row {i} has no fractional entry")
            if min_gap > 1.5 and not (0 < a < _HALF and 0 < b < _HALF):
                rep.violations.append(f"row {i} entries ({a}, {b}) not both in (0, 0.5)")
    return rep


def two_nonzero_rows(MD) -> list[int]:
    return [i for i in range(MD.shape[0]) if len(MD.nonzeros(i)) == 2]


def check_prop6(MD, min_gap: float) -> CheckReport:
    """Rows of M_D with two nonzeros are at least three rows apart above 1.5T gaps."""
    rep = CheckReport("prop6")
    if not min_gap > 1.5:
        rep.applicable = False
        return rep
    rows = two_nonzero_rows(MD)
    for a, b in zip(rows, rows[1:]):
        if b < a + 3:
            rep.violations.append(f"two-nonzero rows {a} and {b} are closer than 3")
    return rep


def check_theorem7(delta: Sequence[int], seg: SegmentationInfo, M) -> CheckReport:
    """|delta(iota_j)| > |delta(iota_j + 1)| wherever iota_{j+1} = iota_j + 2 and
    the early critical entry of column j+1 sits in row iota_j + 1.

    The companion inequality with the "+2" term is evaluated in amplitude
    units and recorded in ``notes`` only.
    """
    rep = CheckReport("theorem7")
    io = seg.iotas
    for j in range(len(io) - 1):
        k = io[j]
        if io[j + 1] != k + 2 or k + 1 >= len(delta):
            continue
        if not 0 < M.entries[k + 1][j + 1] < _HALF:
            continue
        lhs, rhs = abs(delta[k]), abs(delta[k + 1])
        if not lhs > rhs:
            rep.violations.append(f"j={j}: |delta[{k}]|={lhs} <= |delta[{k + 1}]|={rhs}")
        if not abs(delta[k] / 256 + 2) > rhs / 256:
            rep.notes.append(f"j={j}: literal '+2' inequality fails at index {k}")
    return rep


@functools.lru_cache(maxsize=4096)
def critical_halfwidth(blur: BlurMixture, step: int) -> float:
    """Distance w (units of T) at which the blur's tail equals half a count of ``step``.

    For a single Gaussian this is nu(step) * sigma; for a mixture it is the
    narrower window actually seen by the rounding.
    """
    c = abs(int(step))
    if c == 0:
        raise ValueError("window is undefined for a zero step")
    if c == 1:
        return 0.0
    if len(blur.components) == 1:
        return nu(c) * blur.sigma_max
    target = 1.0 / (2 * c)
    tail = lambda w: math.fsum(wt * _upper_tail(w / s) for wt, s in blur.components)  # noqa: E731
    lo, hi = 0.0, 40.0 * blur.sigma_max
    while hi - lo > NU_TOL:
        mid = 0.5 * (lo + hi)
        if tail(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def effective_nu(blur: BlurMixture, step: int) -> float:
    """critical_halfwidth / sigma_max, so that effective_nu * sigma_max is the true window."""
    return critical_halfwidth(blur, step) / blur.sigma_max
