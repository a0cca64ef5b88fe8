"""The piecewise constant/linear gauge attached to a balanced system.

With ``P_n = a_1 * ... * a_n`` the gauge is

* ``1`` for ``x >= 2 b_1``,
* ``1 / P_n`` on ``[2 b_{n+1}, b_n]``,
* linear from ``1 / P_n`` to ``1 / P_{n-1}`` on ``[b_n, 2 b_n]``,
* ``0`` at ``0``.

At finite depth it is only resolved down to ``b_N``; asking for a value in
``(0, b_N)`` raises :class:`BelowResolution` instead of extrapolating.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Sequence, Tuple

from . import kernels
from .construction import BalancedSystem, prefix_products
from .errors import BelowResolution, DomainError
from .numerics import as_rational, common_denominator, format_rational, parse_rational

Breakpoint = Tuple[Fraction, Fraction]


@dataclass(frozen=True)
class GaugeFunction:
    branching: Tuple[int, ...]
    separations: Tuple[Fraction, ...]
    breakpoints: Tuple[Breakpoint, ...] = field(init=False)

    def __post_init__(self):
        a = tuple(int(v) for v in self.branching)
        b = tuple(as_rational(v) for v in self.separations)
        object.__setattr__(self, "branching", a)
        object.__setattr__(self, "separations", b)
        if len(a) != len(b) or not a:
            raise DomainError("need one separation per level and at least one level")
        if any(v <= 0 for v in b):
            raise DomainError("separations must be positive")
        for n in range(len(b) - 1):
            if not 2 * b[n + 1] < b[n]:
                raise DomainError(f"2 b_{n + 2} = {2 * b[n + 1]} is not below b_{n + 1} = {b[n]}")
        object.__setattr__(self, "breakpoints", _breakpoints(a, b))

    @property
    def depth(self) -> int:
        return len(self.branching)

    @property
    def floor(self) -> Fraction:
        """Smallest resolved argument, ``b_N``."""
        return self.separations[-1]

    def __call__(self, x) -> Fraction:
        return eval_gauge(self, x)

    def segments(self) -> List[Tuple[Breakpoint, Breakpoint, str]]:
        pts = self.breakpoints[1:]
        out = []
        for p, q in zip(pts, pts[1:]):
            out.append((p, q, "constant" if p[1] == q[1] else "linear"))
        return out

    def scaled(self, den: int = 1) -> kernels.ScaledGauge:
        """Integer form ``scale * h(X / D)`` over segments, for the kernels.

        ``D`` is ``den`` raised to a multiple of every breakpoint denominator;
        ``scale`` is chosen so that every segment value and slope per unit of
        ``X`` is an integer.
        """
        pts = self.breakpoints[1:]
        den = math.lcm(den, common_denominator(x for x, _ in pts))
        slopes = [(q[1] - p[1]) / ((q[0] - p[0]) * den) for p, q in zip(pts, pts[1:])]
        slopes.append(Fraction(0))
        scale = common_denominator([y for _, y in pts] + slopes)
        xs = kernels.scale_values((x for x, _ in pts), den)
        ys = kernels.scale_values((y for _, y in pts), scale)
        ss = kernels.scale_values(slopes, scale)
        force = not kernels.fits_int64(4 * scale, max(xs))
        return kernels.ScaledGauge(
            kernels.as_array(xs, force), kernels.as_array(ys, force),
            kernels.as_array(ss, force), scale, den,
        )

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "branching": list(self.branching),
            "separations": [format_rational(b) for b in self.separations],
            "breakpoints": [[format_rational(x), format_rational(y)] for x, y in self.breakpoints],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GaugeFunction":
        h = cls(tuple(doc["branching"]), tuple(parse_rational(b) for b in doc["separations"]))
        if "breakpoints" in doc:
            listed = tuple((parse_rational(x), parse_rational(y)) for x, y in doc["breakpoints"])
            if listed != h.breakpoints:
                raise DomainError("serialized breakpoints disagree with the separations")
        return h


def _breakpoints(a: Sequence[int], b: Sequence[Fraction]) -> Tuple[Breakpoint, ...]:
    counts = prefix_products(a)
    pts: List[Breakpoint] = [(Fraction(0), Fraction(0))]
    for n in range(len(a), 0, -1):
        pts.append((b[n - 1], Fraction(1, counts[n])))
        pts.append((2 * b[n - 1], Fraction(1, counts[n - 1])))
    return tuple(pts)


def derive_gauge(system: BalancedSystem) -> GaugeFunction:
    h = GaugeFunction(system.branching, system.separations)
    ys = [y for _, y in h.breakpoints]
    assert all(p <= q for p, q in zip(ys, ys[1:])), "gauge must be non-decreasing"
    return h


def eval_gauge(h: GaugeFunction, x) -> Fraction:
    x = as_rational(x)
    if x < 0:
        raise DomainError(f"gauge evaluated at negative x={x}")
    if x == 0:
        return Fraction(0)
    if x < h.floor:
        raise BelowResolution(x, h.floor)
    pts = h.breakpoints
    if x >= pts[-1][0]:
        return Fraction(1)
    k = bisect_right(pts, (x, Fraction(2))) - 1
    (x0, y0), (x1, y1) = pts[k], pts[k + 1]
    if y0 == y1:
        return y0
    return y0 + (x - x0) * (y1 - y0) / (x1 - x0)


@dataclass
class MinorantReport:
    passed: bool
    c: Fraction
    checks: List[Tuple[Fraction, Fraction, Fraction]]  # (x, h(x), x / c)
    witness: Fraction = None
    note: str = (
        "both sides are affine between consecutive breakpoints, so the inequality "
        "at every breakpoint in [b_N, b_1] (and at 0) implies it on the whole resolved domain"
    )


def check_linear_minorant(h: GaugeFunction, c) -> MinorantReport:
    """Check ``h(x) >= x / c`` at 0 and at every breakpoint up to ``b_1``."""
    c = as_rational(c)
    if c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    b1 = h.separations[0]
    checks = []
    witness = None
    for x, y in h.breakpoints:
        if x > b1:
            break
        g = x / c
        checks.append((x, y, g))
        if witness is None and y < g:
            witness = x
    return MinorantReport(witness is None, c, checks, witness)


def gauge_samples(h: GaugeFunction, count: int) -> List[Tuple[Fraction, Fraction]]:
    """``count`` evenly spaced samples from ``b_N`` to ``4 b_1``, for plotting."""
    if count < 2:
        raise ValueError("need at least two samples")
    lo, hi = h.floor, 4 * h.separations[0]
    step = (hi - lo) / (count - 1)
    return [(lo + k * step, eval_gauge(h, lo + k * step)) for k in range(count)]
