"""Token alphabet, ground-truth labeling and the closed-form parse tables for n_j = 2 gaps."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import RegimeViolation
from .regime import SegmentationInfo

_HALF = Fraction(1, 2)


class Token(str, enum.Enum):
    A = "A"
    F1 = "F1"
    F2 = "F2"
    S1 = "S1"
    S2 = "S2"
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    Z = "Z"

    def __str__(self) -> str:
        return self.value


_FOLLOWERS = {Token.F1: Token.F2, Token.S1: Token.S2, Token.P1: Token.P2, Token.P2: Token.P3}


def pairing_violations(tokens: Sequence[Token]) -> list[str]:
    """Check F1->F2, S1->S2 and P1->P2->P3 adjacency in both directions."""
    out = []
    for i, t in enumerate(tokens):
        nxt = _FOLLOWERS.get(t)
        if nxt is not None and (i + 1 >= len(tokens) or tokens[i + 1] is not nxt):
            out.append(f"{t} at {i} is not followed by {nxt}")
        if t in (Token.F2, Token.S2, Token.P2, Token.P3):
            prev = {Token.F2: Token.F1, Token.S2: Token.S1, Token.P2: Token.P1, Token.P3: Token.P2}[t]
            if i == 0 or tokens[i - 1] is not prev:
                out.append(f"{t} at {i} is not preceded by {prev}")
    return out


def _column_form(col: Sequence[Fraction], k: int) -> str:
    n = len(col)
    nz = [i for i, e in enumerate(col) if e != 0]
    if nz == [k] and col[k] == 1:
        return "A"
    if nz == [k, k + 1] and _HALF < col[k] < 1 and col[k] + col[k + 1] == 1:
        return "F"
    if k >= 1 and nz == [k - 1, k] and 0 < col[k - 1] < _HALF and col[k - 1] + col[k] == 1:
        return "S"
    raise RegimeViolation(f"difference-matrix column with segmentation point {k} has no step form"
                          f" (nonzero rows {nz}, n={n})")


def label_from_truth(MD, seg: SegmentationInfo) -> tuple[Token, ...]:
    """One token per difference-sequence index, read off the difference matrix."""
    n = MD.shape[0]
    tokens: list[Token | None] = [None] * n
    owner: list[int | None] = [None] * n

    def put(i: int, tok: Token, j: int) -> None:
        if not 0 <= i < n:
            raise RegimeViolation(f"token {tok} for column {j} falls outside the sequence")
        if tokens[i] is None:
            tokens[i], owner[i] = tok, j
        elif tokens[i] is Token.F2 and tok is Token.S1 and owner[i] == j - 1:
            tokens[i] = Token.P2
            tokens[i - 1] = Token.P1
            tokens[i + 1] = Token.P3
        else:
            raise RegimeViolation(f"index {i}: {tok} (column {j}) overlaps {tokens[i]}")

    for j, k in enumerate(seg.iotas):
        form = _column_form(MD.column(j), k)
        if form == "A":
            put(k, Token.A, j)
        elif form == "F":
            put(k, Token.F1, j)
            put(k + 1, Token.F2, j)
        else:
            # S2 is written first so a commingled F2/S1 overlap can rewrite its neighbour
            put(k, Token.S2, j)
            put(k - 1, Token.S1, j)
    return tuple(Token.Z if t is None else t for t in tokens)


# ---------------------------------------------------------------------------
# Closed-form tables for gaps with n_j = 2 and 0 < f_j < 0.5


@dataclass(frozen=True)
class GapGeometry:
    """D_j - D_{j-1} = (n - f) T; the first sample after D_{j-1} sits at D_{j-1} + delta."""

    n: int
    f: float
    delta: float

    @classmethod
    def from_gap(cls, gap: float, delta: float) -> "GapGeometry":
        n = math.ceil(gap)
        return cls(n, n - gap, delta)


@dataclass(frozen=True)
class CategoryId:
    category: int
    case: str | None = None  # "1.1", "1.2", "3.1", "3.2"


class BoundaryCoincidence(ValueError):
    """The geometry lies exactly on a category or interval boundary."""


def classify_gap(nu_prev: float, nu_j: float, sigma_max: float, geom: GapGeometry) -> CategoryId:
    if geom.n != 2 or not 0 < geom.f < 0.5:
        raise ValueError("classify_gap needs n_j = 2 and 0 < f_j < 0.5")
    a, b, f = sigma_max * nu_prev, sigma_max * nu_j, geom.f
    x = (1 - f) - b
    for lhs, rhs in ((x, a), (a, f), (b, f), (a, f + b)):
        if lhs == rhs:
            raise BoundaryCoincidence(f"tie between {lhs} and {rhs}")
    if x < a:
        if a < f:
            return CategoryId(1, "1.1" if b < f else "1.2")
        return CategoryId(3, "3.1" if b < f else "3.2")
    if a < f:
        return CategoryId(2)
    return CategoryId(4 if a < f + b else 5)


_ONE = {t: frozenset({t}) for t in Token}
_S2P3 = frozenset({Token.S2, Token.P3})
_F1P1 = frozenset({Token.F1, Token.P1})


@dataclass(frozen=True)
class ParsePrediction:
    """Allowed tokens for the samples in (D_{j-1}, D_j) and for the next one.

    Each position is a set of admissible tokens; sets with more than one
    member are resolved only by neighbouring segments.
    """

    supported: bool
    segment: tuple[frozenset, ...] = ()
    next_opening: frozenset = frozenset()
    alternatives: tuple[tuple[tuple[frozenset, ...], frozenset], ...] = ()
    reason: str = ""

    def admits(self, segment: Sequence[Token], opening: Token) -> bool:
        options = ((self.segment, self.next_opening), *self.alternatives)
        return any(len(seg) == len(segment) and all(t in s for t, s in zip(segment, seg))
                   and opening in nxt for seg, nxt in options)


def _rows(case: str, a: float, b: float, f: float):
    """(lo, hi, segment, next) rows, with 'follow' rows expanded in place."""
    one = lambda *ts: tuple(_ONE[t] for t in ts)  # noqa: E731
    if case == "1.1":
        return [
            (0.0, (1 - f) - b, one(Token.F1, Token.F2), _ONE[Token.A]),
            ((1 - f) - b, a, one(Token.P1, Token.P2), _ONE[Token.P3]),
            (a, 1 - f, one(Token.A, Token.S1), _ONE[Token.S2]),
            (1 - f, 1 - a, one(Token.A), _F1P1),
            (1 - a, (1 - f) + b, (_S2P3,), _F1P1),
            ((1 - f) + b, 1.0, (_S2P3,), _ONE[Token.A]),
        ]
    if case == "1.2":
        head = [
            (0.0, b - f, one(Token.F1, Token.F2), _F1P1),
            (b - f, (1 - f) - b, one(Token.F1, Token.F2), _ONE[Token.A]),
        ]
        mid = [r for r in _clip(_rows("1.1", a, b, f), (1 - f) - b, 1 - a)]
        return head + mid + [(1 - a, 1.0, (_S2P3,), _F1P1)]
    if case == "3.1":
        head = [r for r in _clip(_rows("1.1", a, b, f), 0.0, a)]
        return head + [
            (a, 1 - a, one(Token.A, Token.S1), _ONE[Token.S2]),
            (1 - a, 1 - f, (_S2P3, _ONE[Token.S1]), _ONE[Token.S2]),
            (1 - f, (1 - f) + b, (_S2P3,), _F1P1),
            ((1 - f) + b, 1.0, (_S2P3,), _ONE[Token.A]),
        ]
    if case == "3.2":
        return (list(_clip(_rows("1.2", a, b, f), 0.0, (1 - f) - b))
                + list(_clip(_rows("3.1", a, b, f), (1 - f) - b, 1 - f))
                + [(1 - f, 1.0, (_S2P3,), _F1P1)])
    raise ValueError(case)


def _clip(rows, lo: float, hi: float):
    for r_lo, r_hi, seg, nxt in rows:
        c_lo, c_hi = max(r_lo, lo), min(r_hi, hi)
        if c_lo < c_hi:
            yield (c_lo, c_hi, seg, nxt)


def parse_table(cat: CategoryId, nu_prev: float, nu_j: float, sigma_max: float, f: float):
    """The Delta-interval table for a case, as (lo, hi, segment, next) rows in units of T."""
    if cat.case is None:
        raise ValueError(f"category {cat.category} has no closed-form table")
    return _rows(cat.case, sigma_max * nu_prev, sigma_max * nu_j, f)


def predict_parse(
    cat: CategoryId,
    geom: GapGeometry,
    nu_prev: float,
    nu_j: float,
    sigma_max: float,
) -> ParsePrediction:
    if geom.n != 2 or not 0 < geom.f < 0.5:
        return ParsePrediction(False, reason=f"n_j={geom.n}, f_j={geom.f:.6g} has no closed-form table")
    if cat.case is None:
        return ParsePrediction(False, reason=f"category {cat.category} has no closed-form table")
    d = geom.delta
    for lo, hi, seg, nxt in parse_table(cat, nu_prev, nu_j, sigma_max, geom.f):
        if d == lo or d == hi:
            raise BoundaryCoincidence(f"delta={d} is an interval endpoint")
        if lo < d < hi:
            return ParsePrediction(True, seg, nxt)
    raise BoundaryCoincidence(f"delta={d} lies in no interval of case {cat.case}")


def table_endpoints(cat: CategoryId, nu_prev: float, nu_j: float, sigma_max: float, f: float) -> list[float]:
    if cat.case is None:
        return []
    pts = set()
    for lo, hi, _, _ in parse_table(cat, nu_prev, nu_j, sigma_max, f):
        pts.update((lo, hi))
    return sorted(pts)
