"""Cover costs, counting certificates, and minimal-cover oracles.

No finite computation evaluates the generalized Hausdorff measure of the
limit set directly. What this module offers instead, at finite depth:

* exact upper bounds from canonical covers (the level-n pieces themselves),
* the exact optimum over covers by hulls of consecutive runs of level-m
  pieces (:func:`min_cover`, dynamic programming; cross-checked by the
  branch-and-bound search in :func:`enumerate_min_cover_cost`),
* counting certificates (:func:`certify_lower_bound`) proving that an
  arbitrary finite interval cover costs at least the claimed measure.

Cover elements are closed intervals; an open cover element is represented
by its closure, which leaves every cost unchanged because the gauge is
continuous.
"""

from __future__ import annotations

import math
import random
import warnings
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import kernels
from .construction import BalancedSystem, MultiIndex, elementary_pieces, is_canonical
from .errors import (
    BelowResolution,
    CoverageError,
    DegenerateElement,
    GaugeMismatch,
    InsufficientDepth,
    LevelOutOfRange,
)
from .gauge import GaugeFunction, eval_gauge
from .numerics import ClosedInterval, common_denominator, hull

Target = Optional[MultiIndex]


class OracleSoundnessWarning(UserWarning):
    """The run-cover optimum is only pinned to the measure when every piece
    has diameter exactly ``b_n``."""


@dataclass(frozen=True)
class Cover:
    elements: Tuple[ClosedInterval, ...]
    target: Target = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.target is not None:
            object.__setattr__(self, "target", tuple(self.target))

    def __add__(self, other: "Cover") -> "Cover":
        return Cover(self.elements + other.elements, self.target)


def target_measure(system: BalancedSystem, target: Target) -> Fraction:
    """The claimed measure ``1 / (a_1 ... a_k)`` of a level-k piece (1 for the whole set)."""
    k = 0 if target is None else len(target)
    return Fraction(1, system.counts[k])


def _check_gauge(system: BalancedSystem, h: GaugeFunction):
    if h.branching != system.branching or h.separations != system.separations:
        raise GaugeMismatch("gauge was not derived from this system")


def _sorted_pieces(system, n, target):
    pieces = elementary_pieces(system, n, target)
    pieces.sort(key=lambda p: (p[1].lo, p[1].hi))
    return pieces


def uncovered_pieces(system: BalancedSystem, cover: Cover) -> List[MultiIndex]:
    """Finest-level pieces of the target that meet no cover element."""
    elems = sorted(cover.elements, key=lambda e: e.lo)
    los = [e.lo for e in elems]
    reach = []  # reach[k]: max hi among the first k+1 elements
    for e in elems:
        reach.append(e.hi if not reach else max(reach[-1], e.hi))
    missed = []
    for idx, iv in elementary_pieces(system, system.depth, cover.target):
        k = bisect_right(los, iv.hi)
        if k == 0 or reach[k - 1] < iv.lo:
            missed.append(idx)
    return missed


def cover_cost(cover: Cover, h: GaugeFunction) -> Fraction:
    """``sum h(diam U_j)``; zero-diameter elements contribute nothing."""
    total = Fraction(0)
    for j, e in enumerate(cover.elements):
        d = e.diameter
        if d == 0:
            continue
        if d < h.floor:
            raise BelowResolution(d, h.floor, index=j)
        total += eval_gauge(h, d)
    return total


def canonical_cover(system: BalancedSystem, n: int, target: Target = None) -> Cover:
    """The level-n pieces of the target, used as a cover of it."""
    if not 1 <= n <= system.depth:
        raise LevelOutOfRange(f"level {n} outside 1..{system.depth}")
    if target is not None and len(target) > n:
        raise LevelOutOfRange(f"target {tuple(target)} is deeper than level {n}")
    return Cover(tuple(iv for _, iv in elementary_pieces(system, n, target)), target)


def lebesgue_outer_measure(system: BalancedSystem, n: int) -> Fraction:
    """Total length of the level-n pieces (they are pairwise disjoint)."""
    return sum((iv.diameter for _, iv in elementary_pieces(system, n)), Fraction(0))


# --------------------------------------------------------------------------
# counting certificates

@dataclass
class LowerBoundCertificate:
    target: Target
    m: int
    level_count: int  # a_1 ... a_m
    required: int  # level-m pieces under the target
    claimed: Fraction  # measure of the target
    elements: Tuple[ClosedInterval, ...]
    counts: List[int]  # s_j
    gauge: GaugeFunction
    values: List[Fraction] = field(default_factory=list)  # h(diam U_j)
    failures: List[str] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def bound(self) -> Fraction:
        return Fraction(self.total, self.level_count)

    @property
    def cost(self) -> Fraction:
        return sum(self.values, Fraction(0))

    @property
    def passed(self) -> bool:
        return not self.failures


def select_level(h: GaugeFunction, min_diameter: Fraction) -> int:
    """Least ``m`` with ``2 b_m < min_diameter``."""
    for m, b in enumerate(h.separations, start=1):
        if 2 * b < min_diameter:
            return m
    raise InsufficientDepth(
        f"smallest element diameter {min_diameter} is not above 2 b_N = {2 * h.floor}"
    )


def _audit(cert: LowerBoundCertificate) -> List[str]:
    """The inequalities a certificate must satisfy, from its own fields."""
    problems = []
    h = cert.gauge
    P = cert.level_count
    if P != math.prod(h.branching[: cert.m]):
        problems.append(f"level count {P} != a_1...a_{cert.m}")
    if len(cert.counts) != len(cert.elements) or len(cert.values) != len(cert.elements):
        problems.append("counts/values do not line up with the elements")
        return problems
    if cert.claimed != Fraction(cert.required, P):
        problems.append(f"claimed measure {cert.claimed} != {cert.required}/{P}")
    diams = [e.diameter for e in cert.elements]
    if not diams or not 2 * h.separations[cert.m - 1] < min(diams):
        problems.append(f"level m={cert.m} does not satisfy 2 b_m < min diam")
    if cert.total < cert.required:
        problems.append(f"sum s_j = {cert.total} < {cert.required}")
    for j, (e, s, v) in enumerate(zip(cert.elements, cert.counts, cert.values)):
        if s < 0:
            problems.append(f"s_{j} negative")
        if v != eval_gauge(h, e.diameter):
            problems.append(f"h(diam U_{j}) recorded as {v}, recomputes to {eval_gauge(h, e.diameter)}")
        if v * P < s:
            problems.append(f"h(diam U_{j}) = {v} < s_{j}/{P} = {Fraction(s, P)}")
    if cert.cost < cert.bound or cert.bound < cert.claimed:
        problems.append(f"chain cost {cert.cost} >= {cert.bound} >= {cert.claimed} broken")
    return problems


def certify_lower_bound(system: BalancedSystem, h: GaugeFunction, cover: Cover) -> LowerBoundCertificate:
    """Counting proof that ``cover`` costs at least the target's measure.

    Picks the least level ``m`` with ``2 b_m`` below every element diameter,
    counts for each element the level-m pieces of the target it meets
    (``s_j``), and checks ``sum s_j >= #pieces`` and
    ``h(diam U_j) >= s_j / (a_1 ... a_m)``.
    """
    _check_gauge(system, h)
    missed = uncovered_pieces(system, cover)
    if missed:
        raise CoverageError(missed)
    if not cover.elements:
        raise InsufficientDepth("empty cover")
    for j, e in enumerate(cover.elements):
        if e.diameter == 0:
            raise DegenerateElement(f"cover element {j} is a single point")
    m = select_level(h, min(e.diameter for e in cover.elements))
    k = 0 if cover.target is None else len(cover.target)
    if m < k:
        # counting must happen at or below the target's own level
        m = k

    pieces = _sorted_pieces(system, m, cover.target)
    los = [iv.lo for _, iv in pieces]
    his = [iv.hi for _, iv in pieces]
    counts = [bisect_right(los, e.hi) - bisect_left(his, e.lo) for e in cover.elements]

    cert = LowerBoundCertificate(
        target=cover.target,
        m=m,
        level_count=system.counts[m],
        required=len(pieces),
        claimed=target_measure(system, cover.target),
        elements=cover.elements,
        counts=counts,
        gauge=h,
        values=[eval_gauge(h, e.diameter) for e in cover.elements],
    )
    cert.failures = _audit(cert)
    return cert


def verify_certificate(cert: LowerBoundCertificate) -> List[str]:
    """Standalone re-check; returns the list of violated inequalities."""
    return _audit(cert)


# --------------------------------------------------------------------------
# minimal covers by consecutive runs

@dataclass
class MinCoverResult:
    cost: Fraction
    runs: List[Tuple[int, int]]  # inclusive positions into the sorted pieces
    pieces: List[Tuple[MultiIndex, ClosedInterval]]
    warnings: List[str] = field(default_factory=list)

    def as_cover(self, target: Target = None) -> Cover:
        return Cover(tuple(hull(iv for _, iv in self.pieces[i : j + 1]) for i, j in self.runs), target)


def min_cover(
    system: BalancedSystem, h: GaugeFunction, m: int, target: Target = None, backend=None
) -> MinCoverResult:
    """Cheapest cover by hulls of consecutive runs of level-m pieces."""
    _check_gauge(system, h)
    if not 1 <= m <= system.depth:
        raise LevelOutOfRange(f"level {m} outside 1..{system.depth}")
    if target is not None and len(target) > m:
        raise LevelOutOfRange(f"target {tuple(target)} is deeper than level {m}")
    notes = []
    if not is_canonical(system):
        notes.append("piece diameters differ from b_n; the optimum need not equal the measure")
        warnings.warn(notes[-1], OracleSoundnessWarning, stacklevel=2)

    pieces = _sorted_pieces(system, m, target)
    ivs = [iv for _, iv in pieces]
    den = common_denominator([iv.lo for iv in ivs] + [iv.hi for iv in ivs])
    g = h.scaled(den)
    lo = kernels.as_array(kernels.scale_values((iv.lo for iv in ivs), g.den))
    hi = kernels.as_array(kernels.scale_values((iv.hi for iv in ivs), g.den))
    res = kernels.run_cover(lo, hi, g, backend=backend)
    if res.fail_j >= 0:
        raise BelowResolution(hull(ivs[res.fail_i : res.fail_j + 1]).diameter, h.floor)

    runs = []
    k = len(ivs)
    while k > 0:
        start = int(res.back[k])
        runs.append((start, k - 1))
        k = start
    runs.reverse()
    return MinCoverResult(Fraction(int(res.dp[-1]), g.scale), runs, pieces, notes)


def min_cover_cost(
    system: BalancedSystem, h: GaugeFunction, m: int, target: Target = None, backend=None
) -> Fraction:
    return min_cover(system, h, m, target, backend).cost


@dataclass
class EnumerationResult:
    cost: Fraction
    nodes: int


def enumerate_min_cover_cost(
    system: BalancedSystem, h: GaugeFunction, m: int, target: Target = None
) -> EnumerationResult:
    """Branch-and-bound over every partition into consecutive runs.

    Pure :class:`Fraction` arithmetic and no memoization, so it shares
    nothing with :func:`min_cover` beyond the gauge evaluation. A branch is
    cut only when its partial cost already reaches the incumbent, which
    cannot discard a strictly better partition.
    """
    ivs = [iv for _, iv in _sorted_pieces(system, m, target)]
    count = len(ivs)
    # run cost as a function of (start, end), computed on demand
    best = eval_gauge(h, hull(ivs).diameter)
    nodes = 0

    def search(start: int, partial: Fraction):
        nonlocal best, nodes
        nodes += 1
        lo = ivs[start].lo
        top = ivs[start].hi
        for end in range(start, count):
            top = max(top, ivs[end].hi)
            total = partial + eval_gauge(h, top - lo)
            if total >= best:
                break  # cost is non-decreasing in the run length
            if end + 1 == count:
                best = total
            else:
                search(end + 1, total)

    search(0, Fraction(0))
    return EnumerationResult(best, nodes)


def normalize_cover(system: BalancedSystem, cover: Cover, m: int) -> List[Tuple[int, int]]:
    """Replace each element by the run of level-m target pieces it meets.

    Returns inclusive position ranges into the position-sorted pieces, merged
    and deduplicated; elements meeting no piece are dropped.
    """
    pieces = _sorted_pieces(system, m, cover.target)
    los = [iv.lo for _, iv in pieces]
    his = [iv.hi for _, iv in pieces]
    runs = set()
    for e in cover.elements:
        i, j = bisect_left(his, e.lo), bisect_right(los, e.hi) - 1
        if i <= j:
            runs.add((i, j))
    return sorted(runs)


# --------------------------------------------------------------------------
# random covers for property tests and the acceptance suite

def random_cover(
    system: BalancedSystem,
    rng: random.Random,
    min_diameter: Fraction,
    target: Target = None,
    max_run: int = 64,
) -> Cover:
    """A random valid cover with every element at least ``min_diameter`` wide.

    Finest-level pieces are grouped into random consecutive runs; each run's
    hull is padded by random dyadic amounts and widened to ``min_diameter``
    when needed. A few redundant elements are mixed in.
    """
    pieces = [iv for _, iv in _sorted_pieces(system, system.depth, target)]
    unit = system.b(system.depth) / 4
    elements = []
    i = 0
    while i < len(pieces):
        length = min(len(pieces) - i, rng.choice([1, 1, 2, 3, max_run, rng.randint(1, max_run)]))
        box = hull(pieces[i : i + length])
        lo = box.lo - unit * rng.randint(0, 8)
        hi = box.hi + unit * rng.randint(0, 8)
        if hi - lo < min_diameter:
            extra = min_diameter - (hi - lo) + unit * rng.randint(0, 4)
            left = extra * Fraction(rng.randint(0, 4), 4)
            lo, hi = lo - left, hi + (extra - left)
        elements.append(ClosedInterval(lo, hi))
        i += length
    for _ in range(rng.randint(0, 3)):
        e = rng.choice(elements)
        elements.append(e.translate(unit * rng.randint(-16, 16)))
    rng.shuffle(elements)
    return Cover(tuple(elements), target)
