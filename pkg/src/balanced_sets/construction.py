"""Finite-depth balanced systems of nested rational intervals.

A system of depth ``N`` holds, for every multi-index ``(i1, ..., in)`` with
``n <= N`` and ``1 <= ik <= a_k``, a closed interval ``C[i1..in]``, together
with separations ``b_1 > ... > b_N`` and an index function ``phi`` on the odd
levels. Multi-indices are plain tuples of ints.

:func:`build_balanced_system` produces a system; :func:`validate_balanced`
re-derives every defining property from the raw intervals without looking at
anything the builder computed along the way.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from . import kernels
from .errors import IndexFunctionInfeasible, InvalidPlan, LevelOutOfRange
from .numerics import (
    ClosedInterval,
    common_denominator,
    hull,
    interval_distance,
    largest_power_of_half_at_most,
)

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]

UNIT_INTERVAL = ClosedInterval(Fraction(0), Fraction(1))


def prefix_products(branching: Sequence[int]) -> List[int]:
    """``[1, a1, a1*a2, ...]``; entry ``n`` is the number of level-n pieces."""
    out = [1]
    for a in branching:
        out.append(out[-1] * a)
    return out


@dataclass(frozen=True)
class ConstructionPlan:
    branching: Tuple[int, ...]
    ambient: ClosedInterval = UNIT_INTERVAL
    strict_growth: bool = True

    def __post_init__(self):
        object.__setattr__(self, "branching", tuple(int(a) for a in self.branching))
        problems = plan_problems(self.branching, self.strict_growth)
        if problems:
            raise InvalidPlan("; ".join(problems))
        if self.ambient.diameter <= 0:
            raise InvalidPlan("ambient interval must have positive length")

    @property
    def depth(self) -> int:
        return len(self.branching)

    @cached_property
    def counts(self) -> List[int]:
        return prefix_products(self.branching)

    def check_index(self, idx: MultiIndex) -> MultiIndex:
        idx = tuple(idx)
        if not 1 <= len(idx) <= self.depth:
            raise LevelOutOfRange(f"multi-index {idx} has length outside 1..{self.depth}")
        for k, (i, a) in enumerate(zip(idx, self.branching), start=1):
            if not 1 <= i <= a:
                raise ValueError(f"coordinate {k} of {idx} outside 1..{a}")
        return idx


def plan_problems(branching: Sequence[int], strict_growth: bool) -> List[str]:
    """Human-readable reasons a branching sequence is not admissible."""
    if not branching:
        return ["depth must be at least 1"]
    problems = []
    if strict_growth:
        if branching[0] < 2:
            problems.append(f"a_1 = {branching[0]} < 2")
        counts = prefix_products(branching)
        for n in range(1, len(branching)):
            need = n * counts[n]
            if branching[n] < need:
                problems.append(f"a_{n + 1} = {branching[n]} < {n}*a_1*...*a_{n} = {need}")
    else:
        for n, a in enumerate(branching, start=1):
            if a < 2:
                problems.append(f"a_{n} = {a} < 2")
    return problems


# --------------------------------------------------------------------------
# index function

def length_lex_nth(branching: Sequence[int], j: int) -> MultiIndex:
    """The ``j``-th (1-based) multi-index in length-then-lexicographic order."""
    if j < 1:
        raise ValueError("positions start at 1")
    rest = j - 1
    size = 1
    for length, a in enumerate(branching, start=1):
        size *= a
        if rest < size:
            digits = []
            for radix in reversed(branching[:length]):
                rest, d = divmod(rest, radix)
                digits.append(d + 1)
            return tuple(reversed(digits))
        rest -= size
    raise IndexError(f"only {j - rest - 1} multi-indices exist up to length {len(branching)}")


@dataclass(frozen=True)
class IndexFunction:
    """Odd level ``n`` -> multi-index of length at most ``n``."""

    branching: Tuple[int, ...]
    table: Dict[int, MultiIndex] = field(default_factory=dict)

    def __call__(self, n: int) -> MultiIndex:
        if n % 2 != 1 or n < 1:
            raise ValueError(f"index function is defined on odd levels, got {n}")
        if n in self.table:
            return self.table[n]
        return _canonical_value(self.branching, n)


def _canonical_value(branching, n):
    value = length_lex_nth(branching, (n + 1) // 2)
    if len(value) > n:
        raise IndexFunctionInfeasible(f"phi({n}) = {value} is longer than {n}")
    return value


def canonical_index_function(plan: ConstructionPlan) -> IndexFunction:
    """``phi(2j - 1)`` is the j-th multi-index in length-lex order.

    The table holds every odd level below the depth, which is all that the
    separation property at finite depth consults.
    """
    table = {n: _canonical_value(plan.branching, n) for n in range(1, plan.depth, 2)}
    return IndexFunction(plan.branching, table)


# --------------------------------------------------------------------------
# systems

@dataclass(eq=False)
class BalancedSystem:
    plan: ConstructionPlan
    pieces: Dict[MultiIndex, ClosedInterval]
    separations: Tuple[Fraction, ...]
    phi: IndexFunction

    @property
    def depth(self) -> int:
        return self.plan.depth

    @property
    def branching(self) -> Tuple[int, ...]:
        return self.plan.branching

    @property
    def counts(self) -> List[int]:
        return self.plan.counts

    def b(self, n: int) -> Fraction:
        return self.separations[n - 1]

    def piece(self, idx: MultiIndex) -> ClosedInterval:
        return self.pieces[tuple(idx)]

    @cached_property
    def _levels(self) -> Dict[int, List[MultiIndex]]:
        levels: Dict[int, List[MultiIndex]] = {n: [] for n in range(1, self.depth + 1)}
        for idx in self.pieces:
            levels.setdefault(len(idx), []).append(idx)
        for idxs in levels.values():
            idxs.sort()
        return levels

    def level_indices(self, n: int) -> List[MultiIndex]:
        if not 1 <= n <= self.depth:
            raise LevelOutOfRange(f"level {n} outside 1..{self.depth}")
        return self._levels[n]

    def children(self, idx: MultiIndex) -> List[MultiIndex]:
        idx = tuple(idx)
        a = self.branching[len(idx)]
        return [idx + (s,) for s in range(1, a + 1)]


def elementary_pieces(
    system: BalancedSystem, n: int, within: Optional[MultiIndex] = None
) -> List[Tuple[MultiIndex, ClosedInterval]]:
    """Level-``n`` pieces in lexicographic order, optionally under ``within``."""
    if not 1 <= n <= system.depth:
        raise LevelOutOfRange(f"level {n} outside 1..{system.depth}")
    idxs = system.level_indices(n)
    if within is not None:
        within = tuple(within)
        if len(within) > n:
            raise LevelOutOfRange(f"{within} is deeper than level {n}")
        k = len(within)
        idxs = [i for i in idxs if i[:k] == within]
    return [(i, system.pieces[i]) for i in idxs]


def _spread(mid: Fraction, count: int, spacing: Fraction) -> List[Fraction]:
    half_span = spacing * (count - 1) / 2
    return [mid - half_span + k * spacing for k in range(count)]


def _min_gap(points: List[Fraction]) -> Fraction:
    pts = sorted(points)
    return min(b - a for a, b in zip(pts, pts[1:]))


def _choose_separation(parents, centers, prev_b, group, others, start):
    """Largest power of 1/2 keeping the next level strictly admissible."""
    flat = [c for cs in centers.values() for c in cs]
    gap = _min_gap(flat) if len(flat) > 1 else None
    group_gap = min(_min_gap(centers[p]) for p in group) if others else None
    other_spread = max(centers[p][-1] - centers[p][0] for p in others) if others else None

    def admissible(b):
        if gap is not None and not 3 * b < gap:
            return False
        if prev_b is not None and not 2 * b < prev_b:
            return False
        if others and not group_gap - b > other_spread + b:
            return False
        for p, cs in centers.items():
            box = parents[p]
            if cs[0] - b / 2 < box.lo or cs[-1] + b / 2 > box.hi:
                return False
        return True

    b = start
    while not admissible(b):
        b /= 2
    return b


def build_balanced_system(plan: ConstructionPlan) -> BalancedSystem:
    """Deterministic recursive construction on a dyadic grid.

    Children of every parent sit on an evenly spaced grid around the parent's
    midpoint. At an odd level ``n`` the parents inside ``C[phi(n)]`` spread
    their children as widely as the parent allows; every other parent then
    packs its children into a window of width ``delta / 2``, where ``delta``
    is the smallest gap among the centers placed so far. Each child is the
    closed ball of diameter ``b_{n+1}`` around its center.
    """
    phi = canonical_index_function(plan)
    pieces: Dict[MultiIndex, ClosedInterval] = {}
    parents: Dict[MultiIndex, ClosedInterval] = {(): plan.ambient}
    separations: List[Fraction] = []
    start = largest_power_of_half_at_most(plan.ambient.diameter)

    for n, a in enumerate(plan.branching):
        # building level n + 1 from level n
        if n % 2 == 1:
            target = phi(n)
            group = [p for p in parents if p[: len(target)] == target]
            others = [p for p in parents if p[: len(target)] != target]
        else:
            group, others = list(parents), []

        centers: Dict[MultiIndex, List[Fraction]] = {}
        for p in group:
            box = parents[p]
            centers[p] = _spread(box.center, a, largest_power_of_half_at_most(box.diameter / a))
        if others:
            delta = _min_gap([c for p in group for c in centers[p]])
            tight = largest_power_of_half_at_most(delta / 2 / (a - 1))
            for p in others:
                centers[p] = _spread(parents[p].center, a, tight)

        prev_b = separations[-1] if separations else None
        b = _choose_separation(parents, centers, prev_b, group, others, start)
        separations.append(b)

        level: Dict[MultiIndex, ClosedInterval] = {}
        for p in sorted(centers):
            for s, c in enumerate(centers[p], start=1):
                level[p + (s,)] = ClosedInterval.ball(c, b)
        pieces.update(level)
        parents = level
        logger.debug("level %d: %d pieces, b=%s", n + 1, len(level), b)

    return BalancedSystem(plan, pieces, tuple(separations), phi)


# --------------------------------------------------------------------------
# independent validation

@dataclass
class PropertyCheck:
    name: str
    passed: bool
    detail: str = ""
    witness: Optional[dict] = None
    required: bool = True


@dataclass
class ValidationReport:
    checks: List[PropertyCheck]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def __getitem__(self, name: str) -> PropertyCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> List[PropertyCheck]:
        return [c for c in self.checks if c.required and not c.passed]


def _level_arrays(intervals: List[ClosedInterval], extra: Sequence[Fraction] = ()):
    den = common_denominator([iv.lo for iv in intervals] + [iv.hi for iv in intervals] + list(extra))
    lo = kernels.as_array(kernels.scale_values((iv.lo for iv in intervals), den))
    hi = kernels.as_array(kernels.scale_values((iv.hi for iv in intervals), den))
    return den, lo, hi


def _check_growth(system):
    problems = plan_problems(system.branching, system.plan.strict_growth)
    mode = "strict" if system.plan.strict_growth else "relaxed"
    return PropertyCheck("i", not problems, f"{mode} growth: " + ("ok" if not problems else "; ".join(problems)))


def _check_structure(system):
    expected = set()
    for n in range(1, system.depth + 1):
        expected.update(product(*(range(1, a + 1) for a in system.branching[:n])))
    have = set(system.pieces)
    missing = sorted(expected - have)
    extra = sorted(have - expected)
    if missing or extra or len(system.separations) != system.depth:
        witness = {"missing": missing[:5], "unexpected": extra[:5]}
        return PropertyCheck("structure", False, "piece table does not match the branching", witness)
    return PropertyCheck("structure", True, f"{len(have)} pieces over {system.depth} levels")


def _check_nesting(system):
    for idx in system.pieces:
        if len(idx) > 1 and not system.pieces[idx[:-1]].contains(system.pieces[idx]):
            return PropertyCheck(
                "ii", False, "child not contained in parent",
                {"child": idx, "parent": idx[:-1]},
            )
    return PropertyCheck("ii", True, "every child lies inside its parent")


def _check_diameters(system):
    for idx, iv in system.pieces.items():
        b = system.b(len(idx))
        if iv.diameter > b:
            return PropertyCheck("iii", False, "diameter exceeds b_n",
                                 {"piece": idx, "diameter": iv.diameter, "b_n": b})
    return PropertyCheck("iii", True, "diam C <= b_n at every level")


def _check_exact_diameters(system):
    for idx, iv in system.pieces.items():
        if iv.diameter != system.b(len(idx)):
            return PropertyCheck("canonical-diameters", False, "diameter differs from b_n",
                                 {"piece": idx, "diameter": iv.diameter}, required=False)
    return PropertyCheck("canonical-diameters", True, "diam C = b_n exactly", required=False)


def _check_separation(system, backend=None):
    pairs = 0
    for n in range(1, system.depth + 1):
        idxs = system.level_indices(n)
        ivs = [system.pieces[i] for i in idxs]
        b = system.b(n)
        den, lo, hi = _level_arrays(ivs, [b])
        scan = kernels.pair_scan(lo, hi, int(2 * b * den), backend=backend)
        pairs += len(ivs) * (len(ivs) - 1) // 2
        if scan.first_i >= 0:
            p, q = idxs[scan.first_i], idxs[scan.first_j]
            return PropertyCheck(
                "iv", False, f"level {n}: dist <= 2 b_n",
                {"level": n, "pair": (p, q),
                 "distance": interval_distance(system.pieces[p], system.pieces[q]), "2b_n": 2 * b},
            )
    return PropertyCheck("iv", True, f"{pairs} same-level pairs at distance > 2 b_n")


def _check_index_separation(system, backend=None):
    """Odd-level separation driven by ``phi``, decided by interval containment."""
    tested = []
    for n in range(1, system.depth, 2):
        try:
            target = system.phi(n)
        except (IndexFunctionInfeasible, IndexError, ValueError) as exc:
            return PropertyCheck("v", False, f"phi({n}) unusable: {exc}")
        if len(target) > n or target not in system.pieces:
            return PropertyCheck("v", False, f"phi({n}) = {target} is not a multi-index of length <= {n}")
        box = system.pieces[target]
        inside, outside = [], []
        for idx in system.level_indices(n):
            (inside if box.contains(system.pieces[idx]) else outside).append(idx)
        if not outside:
            tested.append(n)
            continue

        tight_gap, tight_parent = None, None
        for p in inside:
            kids = [system.pieces[c] for c in system.children(p)]
            _, lo, hi = _level_arrays(kids)
            scan = kernels.pair_scan(lo, hi, -1, backend=backend)
            gap = interval_distance(kids[scan.min_i], kids[scan.min_j])
            if tight_gap is None or gap < tight_gap:
                tight_gap, tight_parent = gap, p
        wide, wide_parent = None, None
        for q in outside:
            span = hull(system.pieces[c] for c in system.children(q)).diameter
            if wide is None or span > wide:
                wide, wide_parent = span, q
        if tight_gap is not None and not tight_gap > wide:
            return PropertyCheck(
                "v", False, f"level {n}: sibling gap inside C[phi(n)] does not exceed an outside hull",
                {"level": n, "inside": tight_parent, "outside": wide_parent,
                 "gap": tight_gap, "hull": wide},
            )
        tested.append(n)
    return PropertyCheck("v", True, f"odd levels checked: {tested or 'none'}")


def _check_decay(system):
    seps = system.separations
    for n in range(len(seps) - 1):
        if not 2 * seps[n + 1] < seps[n]:
            return PropertyCheck("decay", False, "2 b_{n+1} >= b_n",
                                 {"n": n + 1, "b_n": seps[n], "b_n+1": seps[n + 1]})
    return PropertyCheck("decay", True, "2 b_{n+1} < b_n for all n")


def validate_balanced(system: BalancedSystem, backend=None) -> ValidationReport:
    """Re-check properties (i)-(v) by exhaustive comparison of the raw intervals.

    Failures come back as data: each failing check carries a witness.
    """
    checks = [_check_growth(system), _check_structure(system)]
    if not checks[-1].passed:
        return ValidationReport(checks)
    checks += [
        _check_nesting(system),
        _check_diameters(system),
        _check_separation(system, backend),
        _check_index_separation(system, backend),
        _check_decay(system),
        _check_exact_diameters(system),
    ]
    return ValidationReport(checks)


def is_canonical(system: BalancedSystem) -> bool:
    return all(iv.diameter == system.b(len(idx)) for idx, iv in system.pieces.items())


def level_count(system: BalancedSystem, n: int, within: Optional[MultiIndex] = None) -> int:
    k = 0 if within is None else len(within)
    return math.prod(system.branching[k:n])
