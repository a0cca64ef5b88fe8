"""Exact rational scalars and closed intervals on the real line.

Scalars are :class:`fractions.Fraction` throughout: always reduced, positive
denominator, zero is ``0/1``. Nothing in the measure pipeline touches floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import EmptyFamily

Rational = Fraction
RationalLike = Union[Fraction, int, str]


def as_rational(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"refusing inexact or boolean scalar {value!r}")
    return Fraction(value)


def format_rational(value: Fraction) -> str:
    """``"p/q"``, or just ``"p"`` when the denominator is 1."""
    return str(Fraction(value))


def parse_rational(text: str) -> Fraction:
    if not isinstance(text, str):
        raise TypeError(f"rationals are serialized as strings, got {type(text).__name__}")
    if any(c in text for c in ".eE"):
        raise ValueError(f"decimal notation not accepted: {text!r}")
    return Fraction(text)


@dataclass(frozen=True, order=True)
class ClosedInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def diameter(self) -> Fraction:
        return self.hi - self.lo

    @property
    def center(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, other: "ClosedInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def contains_point(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def intersects(self, other: "ClosedInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def translate(self, offset: Fraction) -> "ClosedInterval":
        return ClosedInterval(self.lo + offset, self.hi + offset)

    def dilate(self, factor: Fraction) -> "ClosedInterval":
        """Scale about the center."""
        half = self.diameter * factor / 2
        return ClosedInterval(self.center - half, self.center + half)

    @classmethod
    def ball(cls, center: Fraction, diameter: Fraction) -> "ClosedInterval":
        return cls(center - diameter / 2, center + diameter / 2)

    def to_json(self) -> list:
        return [format_rational(self.lo), format_rational(self.hi)]

    @classmethod
    def from_json(cls, pair: Sequence[str]) -> "ClosedInterval":
        if len(pair) != 2:
            raise ValueError(f"interval needs two endpoints, got {pair!r}")
        return cls(parse_rational(pair[0]), parse_rational(pair[1]))

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def interval_distance(a: ClosedInterval, b: ClosedInterval) -> Fraction:
    """Distance between two closed intervals; zero iff they meet."""
    gap = max(a.lo, b.lo) - min(a.hi, b.hi)
    return gap if gap > 0 else Fraction(0)


def hull_diameter(pieces: Iterable[ClosedInterval]) -> Fraction:
    pieces = list(pieces)
    if not pieces:
        raise EmptyFamily("hull of an empty family")
    return max(p.hi for p in pieces) - min(p.lo for p in pieces)


def hull(pieces: Iterable[ClosedInterval]) -> ClosedInterval:
    pieces = list(pieces)
    if not pieces:
        raise EmptyFamily("hull of an empty family")
    return ClosedInterval(min(p.lo for p in pieces), max(p.hi for p in pieces))


def common_denominator(values: Iterable[Fraction]) -> int:
    den = 1
    for v in values:
        den = math.lcm(den, v.denominator)
    return den


def largest_power_of_half_at_most(x: Fraction) -> Fraction:
    """Largest ``2**-k`` (k may be negative) not exceeding ``x > 0``."""
    if x <= 0:
        raise ValueError("need a positive bound")
    # floor(log2(x)) from the bit lengths, then correct by one step either way
    k = x.numerator.bit_length() - x.denominator.bit_length()
    p = Fraction(2) ** k
    while p > x:
        p /= 2
    while p * 2 <= x:
        p *= 2
    return p
