"""Sampled weak contractions and the overlap bounds they must obey.

A candidate map is a finite table of ``(x, f(x))`` pairs. Being a weak
contraction (``|f(x) - f(y)| < |x - y|`` for ``x != y``) is then decidable by
an exact pairwise scan.

The representative of a piece is its left endpoint. Operations that need one
sample per piece say so and check it; they never sample on their own.
Sampling at the finest level keeps every sample inside the finest pieces,
which is what the at-most-one-child argument relies on.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import kernels
from .construction import BalancedSystem, MultiIndex, elementary_pieces
from .errors import (
    DepthExhausted,
    GrowthModeRequired,
    IndexMismatch,
    InsufficientSamples,
    LevelOutOfRange,
    MalformedMap,
    NotCertifiable,
    NotWeakContraction,
)
from .numerics import ClosedInterval, as_rational, common_denominator, format_rational, parse_rational


@dataclass(frozen=True)
class FiniteMap:
    points: Tuple[Tuple[Fraction, Fraction], ...]
    provenance: str = ""

    def __post_init__(self):
        pts = sorted((as_rational(x), as_rational(y)) for x, y in self.points)
        for (x0, _), (x1, _) in zip(pts, pts[1:]):
            if x0 == x1:
                raise MalformedMap(f"domain point {x0} appears twice")
        object.__setattr__(self, "points", tuple(pts))

    @property
    def xs(self) -> List[Fraction]:
        return [x for x, _ in self.points]

    @property
    def images(self) -> List[Fraction]:
        return [y for _, y in self.points]

    def __len__(self):
        return len(self.points)

    def to_json(self) -> dict:
        return {
            "provenance": self.provenance,
            "points": [[format_rational(x), format_rational(y)] for x, y in self.points],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FiniteMap":
        return cls(tuple((parse_rational(x), parse_rational(y)) for x, y in doc["points"]),
                   doc.get("provenance", ""))


@dataclass
class ContractionReport:
    passed: bool
    pair: Optional[Tuple[Fraction, Fraction]] = None  # first offending (x_i, x_j)


def check_weak_contraction(fmap: FiniteMap, backend=None) -> ContractionReport:
    if len(fmap) == 0:
        raise MalformedMap("empty map")
    if len(fmap) == 1:
        return ContractionReport(True)
    den = common_denominator(fmap.xs + fmap.images)
    x = kernels.as_array(kernels.scale_values(fmap.xs, den))
    fx = kernels.as_array(kernels.scale_values(fmap.images, den))
    i, j = kernels.first_expansive_pair(x, fx, backend=backend)
    if i < 0:
        return ContractionReport(True)
    return ContractionReport(False, (fmap.points[i][0], fmap.points[j][0]))


def _require_contraction(fmap, backend):
    rep = check_weak_contraction(fmap, backend)
    if not rep.passed:
        raise NotWeakContraction(rep.pair)


def find_fixed_points(fmap: FiniteMap, strict: bool = True) -> List[Fraction]:
    """Sampled fixed points. More than one is impossible for a weak
    contraction; with ``strict`` that case raises with the pair as witness."""
    fixed = [x for x, y in fmap.points if x == y]
    if strict and len(fixed) > 1:
        raise NotWeakContraction((fixed[0], fixed[1]))
    return fixed


def representatives(system: BalancedSystem, n: Optional[int] = None) -> List[Fraction]:
    """Left endpoints of the level-n pieces (finest level by default)."""
    n = system.depth if n is None else n
    return sorted(iv.lo for _, iv in elementary_pieces(system, n))


# --------------------------------------------------------------------------
# child intersections

@dataclass
class IntersectionReport:
    target: MultiIndex
    m: int
    outside: List[MultiIndex]
    counts: Dict[MultiIndex, int]
    hits: Dict[MultiIndex, List[MultiIndex]]

    @property
    def n(self) -> int:
        return len(self.target)

    @property
    def max_count(self) -> int:
        return max(self.counts.values(), default=0)

    @property
    def refutations(self) -> List[MultiIndex]:
        """Outside pieces whose image meets two or more children."""
        return [e for e, c in self.counts.items() if c >= 2]


def admissible_pairs(system: BalancedSystem, n: Optional[int] = None) -> List[Tuple[MultiIndex, int]]:
    """``(target, m)`` with ``m`` odd, ``m < N`` and ``phi(m) = target``."""
    out = []
    for m in range(1, system.depth, 2):
        t = system.phi(m)
        if n is None or len(t) == n:
            out.append((t, m))
    return out


def analyze_child_intersections(
    system: BalancedSystem, fmap: FiniteMap, target: MultiIndex, m: int, backend=None
) -> IntersectionReport:
    """Count, for each level-m piece outside ``C[target]``, the level-(m+1)
    pieces of the target met by the hull of its sampled images."""
    _require_contraction(fmap, backend)
    target = tuple(target)
    if m % 2 != 1 or not 1 <= m < system.depth:
        raise IndexMismatch(f"m={m} must be odd and below the depth {system.depth}")
    if len(target) > m or system.phi(m) != target:
        raise IndexMismatch(f"phi({m}) = {system.phi(m)} is not {target}")

    box = system.piece(target)
    xs = fmap.xs
    images = fmap.images
    outside = [(idx, iv) for idx, iv in elementary_pieces(system, m) if not box.contains(iv)]
    kids = sorted(elementary_pieces(system, m + 1, target), key=lambda p: p[1].lo)
    kid_lo = [iv.lo for _, iv in kids]
    kid_hi = [iv.hi for _, iv in kids]

    counts, hits, missing = {}, {}, []
    for idx, iv in outside:
        a, b = bisect_left(xs, iv.lo), bisect_right(xs, iv.hi)
        if a == b:
            missing.append(idx)
            continue
        img_lo, img_hi = min(images[a:b]), max(images[a:b])
        first, last = bisect_left(kid_hi, img_lo), bisect_right(kid_lo, img_hi)
        counts[idx] = max(0, last - first)
        hits[idx] = [kids[k][0] for k in range(first, last)]
    if missing:
        raise InsufficientSamples(f"{len(missing)} outside level-{m} piece(s) unsampled, first {missing[0]}")
    return IntersectionReport(target, m, [idx for idx, _ in outside], counts, hits)


def bound_overlap_measure(system: BalancedSystem, report: IntersectionReport) -> Fraction:
    """Certified bound on the measure of ``C[target]`` meeting the image of the rest.

    Each of the ``#outside`` level-m pieces can reach at most one level-(m+1)
    piece of the target, and each of those has measure ``1/(a_1...a_{m+1})``.
    """
    if report.max_count >= 2:
        raise NotCertifiable(f"refutation witnesses: {report.refutations[:3]}")
    bound = Fraction(len(report.outside), system.counts[report.m + 1])
    assert bound <= Fraction(1, system.branching[report.m]) <= Fraction(1, system.branching[report.n])
    return bound


def aggregate_overlap_bound(system: BalancedSystem, n: int) -> Fraction:
    """``(a_1 ... a_n) / a_{n+1}``: the per-target bound ``1/a_{n+1}`` summed over level n."""
    if not system.plan.strict_growth:
        raise GrowthModeRequired("the 1/n form of the bound needs strict growth")
    if not 1 <= n < system.depth:
        raise LevelOutOfRange(f"need 1 <= n < {system.depth}, got {n}")
    return Fraction(system.counts[n], system.branching[n])


@dataclass
class SweepRow:
    n: int
    per_target: Fraction  # 1 / a_{n+1}
    aggregate: Fraction  # (a_1...a_n) / a_{n+1}
    inverse_n: Fraction
    certified: List[Tuple[MultiIndex, int, Fraction]] = field(default_factory=list)
    max_count: int = 0

    @property
    def ok(self) -> bool:
        return self.max_count <= 1 and self.aggregate <= self.inverse_n and all(
            b <= self.per_target for _, _, b in self.certified
        )


def an_sweep(system: BalancedSystem, maps: Sequence[FiniteMap], backend=None) -> List[SweepRow]:
    """Overlap bounds for ``n = 1 .. N-1`` with every sampled map analyzed at
    every admissible ``(target, m)`` whose target has length ``n``."""
    if not system.plan.strict_growth:
        raise GrowthModeRequired("the 1/n form of the bound needs strict growth")
    rows = []
    for n in range(1, system.depth):
        row = SweepRow(n, Fraction(1, system.branching[n]), aggregate_overlap_bound(system, n), Fraction(1, n))
        for target, m in admissible_pairs(system, n):
            worst = 0
            bound = None
            for fmap in maps:
                rep = analyze_child_intersections(system, fmap, target, m, backend)
                worst = max(worst, rep.max_count)
                if rep.max_count <= 1:
                    bound = bound_overlap_measure(system, rep)
            row.max_count = max(row.max_count, worst)
            if bound is not None:
                row.certified.append((target, m, bound))
        rows.append(row)
    return rows


# --------------------------------------------------------------------------
# overlap decomposition

@dataclass
class OverlapReport:
    fixed: List[Fraction]
    separated: List[Tuple[Fraction, Fraction, int, MultiIndex]]  # (x, fx, least n, piece of fx)
    skipped: int  # samples whose image lies outside every finest piece
    monotone: bool
    depth: int


def check_overlap_decomposition(system: BalancedSystem, fmap: FiniteMap, depth_n: int, backend=None) -> OverlapReport:
    """Route every sampled point of ``K cap f(K)`` to the fixed set or to some ``A_n``.

    For each sample whose image lands in a finest piece and differs from the
    sample, exhibit the least ``n <= depth_n`` such that the level-n piece
    holding the image does not hold the sample.
    """
    _require_contraction(fmap, backend)
    if not 1 <= depth_n <= system.depth:
        raise LevelOutOfRange(f"depth {depth_n} outside 1..{system.depth}")
    finest = sorted(elementary_pieces(system, system.depth), key=lambda p: p[1].lo)
    los = [iv.lo for _, iv in finest]

    fixed, separated, skipped = [], [], 0
    member = {n: set() for n in range(1, depth_n + 1)}  # sampled A_n
    for x, fx in fmap.points:
        k = bisect_right(los, fx) - 1
        if k < 0 or not finest[k][1].contains_point(fx):
            skipped += 1
            continue
        if fx == x:
            fixed.append(x)
            continue
        leaf = finest[k][0]
        least = None
        for n in range(1, depth_n + 1):
            if not system.piece(leaf[:n]).contains_point(x):
                member[n].add((x, fx))
                if least is None:
                    least = n
        if least is None:
            raise DepthExhausted(x, fx, depth_n)
        separated.append((x, fx, least, leaf[:least]))
    monotone = all(member[n] <= member[n + 1] for n in range(1, depth_n))
    return OverlapReport(fixed, separated, skipped, monotone, depth_n)


# --------------------------------------------------------------------------
# random candidates

def _dyadic(rng: random.Random, lo: Fraction, hi: Fraction, bits: int = 12) -> Fraction:
    return lo + (hi - lo) * Fraction(rng.randrange(1 << bits), 1 << bits)


def random_weak_contraction(
    rng: random.Random,
    xs: Sequence[Fraction],
    landing: Optional[ClosedInterval] = None,
    anchors: Optional[Sequence[Fraction]] = None,
    max_tries: int = 1000,
    grid_bits: int = 56,
    backend=None,
) -> FiniteMap:
    """Rejection sampling over affine and folded candidates plus perturbation.

    A candidate is ``x -> alpha * x + beta`` or ``x -> alpha * |x - c| + beta``
    with ``|alpha| < 1`` (often within ``2**-20`` of 1), plus a per-sample
    dyadic jitter. When ``landing`` is given, ``beta`` is chosen so that a
    random sample (drawn from ``anchors`` if given) maps into it. Images are floored to multiples of
    ``2**-grid_bits`` so the table stays on a bounded dyadic grid; candidates
    failing the exact pairwise check (after rounding) are discarded.
    """
    xs = sorted(set(as_rational(x) for x in xs))
    gaps = [b - a for a, b in zip(xs, xs[1:])]
    min_gap = min(gaps) if gaps else Fraction(1)
    for _ in range(max_tries):
        slack = Fraction(1, 1 << rng.choice([1, 2, 4, 8, 20]))
        alpha = (1 - slack) * Fraction(rng.randrange(1, 1 << 8), 1 << 8)
        if rng.random() < 0.5:
            alpha = -alpha
        fold = rng.choice(xs) if rng.random() < 0.3 else None

        def core(x):
            return alpha * (abs(x - fold) if fold is not None else x)

        anchor = rng.choice(anchors) if anchors else rng.choice(xs)
        if landing is not None:
            beta = _dyadic(rng, landing.lo, landing.hi) - core(anchor)
        else:
            beta = _dyadic(rng, Fraction(-1), Fraction(1))
        # jitter usually harmless, occasionally large enough to be rejected
        amp = (1 - abs(alpha)) * min_gap * Fraction(1, rng.choice([4, 4, 4, 1])) / 2
        jitter = [_dyadic(rng, -amp, amp, 8) if amp else Fraction(0) for _ in xs]
        grid = 1 << grid_bits
        pts = tuple(
            (x, Fraction(math.floor((core(x) + beta + e) * grid), grid)) for x, e in zip(xs, jitter)
        )
        fmap = FiniteMap(pts, provenance="random-weak-contraction")
        if check_weak_contraction(fmap, backend).passed:
            return fmap
    raise RuntimeError(f"no weak contraction accepted in {max_tries} tries")


def plant_expansive_pair(rng: random.Random, fmap: FiniteMap) -> FiniteMap:
    """Copy of ``fmap`` with one image moved so some pair is not contracted."""
    if len(fmap) < 2:
        raise MalformedMap("need two points to plant a pair")
    pts = list(fmap.points)
    i, j = sorted(rng.sample(range(len(pts)), 2))
    (xi, yi), (xj, _) = pts[i], pts[j]
    stretch = 1 + Fraction(rng.randrange(0, 8), 8)
    sign = rng.choice([-1, 1])
    pts[j] = (xj, yi + sign * stretch * (xj - xi))
    return FiniteMap(tuple(pts), provenance="planted-expansive-pair")


def sweep_maps(system: BalancedSystem, rng: random.Random, count: int, backend=None) -> List[FiniteMap]:
    """Random weak contractions sampled at every finest-level representative.

    Map ``k`` is aimed at the ``k``-th admissible ``(target, m)`` pair (round
    robin): a sample from a level-m piece outside the target is sent into a
    random finest piece of the target, so the child counts are exercised.
    """
    xs = representatives(system)
    pairs = admissible_pairs(system)
    maps = []
    for k in range(count):
        if not pairs:
            maps.append(random_weak_contraction(rng, xs, backend=backend))
            continue
        target, m = pairs[k % len(pairs)]
        box = system.piece(target)
        anchors = [x for x in xs if not box.contains_point(x)]
        _, landing = rng.choice(elementary_pieces(system, system.depth, target))
        maps.append(random_weak_contraction(rng, xs, landing, anchors, backend=backend))
    return maps
