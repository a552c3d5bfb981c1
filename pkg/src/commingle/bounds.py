"""Interval bounds on discontinuity locations and on distances between them.

All times are in units of T. Labels are reduced to three classes:
``A``, ``EARLY`` (F1 or P1 at the segmentation point: the sample lies just
after the discontinuity) and ``LATE`` (S2 or P3: the previous sample lies
just before it).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .labeling import Token

DEFAULT_MIN_GAP = 1.5


class LabelClass(str, enum.Enum):
    A = "A"
    EARLY = "EARLY"
    LATE = "LATE"


@dataclass(frozen=True)
class LocationInterval:
    """Open interval (lo, hi)."""

    lo: float
    hi: float

    def __contains__(self, x: float) -> bool:
        return self.lo < x < self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_json(self) -> list[float]:
        return [self.lo, self.hi]


class EmptyIntervalError(ValueError):
    """Bounds that cannot both hold; the labels upstream are inconsistent."""


def _interval(lo: float, hi: float) -> LocationInterval:
    if not lo < hi:
        raise EmptyIntervalError(f"empty interval ({lo}, {hi})")
    return LocationInterval(lo, hi)


def label_class(token: Token) -> LabelClass:
    if token is Token.A:
        return LabelClass.A
    if token in (Token.F1, Token.P1):
        return LabelClass.EARLY
    if token in (Token.S2, Token.P3):
        return LabelClass.LATE
    raise ValueError(f"{token} never marks a segmentation point")


def segmentation_labels(tokens: Sequence[Token]) -> list[tuple[LabelClass, int]]:
    """(class, iota) for each discontinuity, in order, read from a token sequence."""
    out = []
    for i, t in enumerate(tokens):
        if t in (Token.A, Token.F1, Token.P1, Token.S2, Token.P3):
            out.append((label_class(t), i))
    return out


def locate(label: LabelClass, iota: int, t_first: float, nu_j: float, sigma_max: float) -> LocationInterval:
    """Where D_j can lie given the label at its segmentation point ``iota``."""
    w = nu_j * sigma_max
    at = t_first + iota
    if label is LabelClass.EARLY:
        return _interval(at - w, at)
    if label is LabelClass.LATE:
        return _interval(at - 1, at - 1 + w)
    if label is LabelClass.A:
        return _interval(at - 1 + w, at - w)
    raise ValueError(f"unknown label class {label!r}")


def distance_bounds(
    x: LabelClass,
    y: LabelClass,
    iota_j: int,
    iota_jk: int,
    nu_j: float,
    nu_jk: float,
    sigma_max: float,
    *,
    literal: bool = False,
) -> LocationInterval:
    """Bounds on D_{j+k} - D_j from the labels (x, y) at their segmentation points.

    ``literal=True`` swaps in the alternative (LATE, A) lower bound
    d + c + a, which adds both window widths instead of subtracting the
    earlier one. It is not implied by the two location intervals and is kept
    only for comparison.
    """
    if iota_jk <= iota_j:
        raise ValueError("segmentation points must be increasing")
    d = iota_jk - iota_j
    a, c = nu_j * sigma_max, nu_jk * sigma_max
    E, L, A = LabelClass.EARLY, LabelClass.LATE, LabelClass.A
    table = {
        (A, A): (d - 1 + a + c, d + 1 - a - c),
        (A, E): (d - c, d + 1 - a),
        (A, L): (d - 1 + a, d + c - a),
        (E, A): (d - 1 + c, d + a - c),
        (E, E): (d - c, d + a),
        (E, L): (d - 1, d - 1 + a + c),
        (L, A): (d + c + a if literal else d + c - a, d + 1 - c),
        (L, E): (d + 1 - a - c, d + 1),
        (L, L): (d - a, d + c),
    }
    lo, hi = table[(x, y)]
    return _interval(lo, hi)


def tighten_with_min_gap(interval: LocationInterval, k: int, min_gap: float = DEFAULT_MIN_GAP) -> LocationInterval:
    """Raise the lower bound of a k-step distance to k * min_gap."""
    return _interval(max(interval.lo, k * min_gap), interval.hi)
