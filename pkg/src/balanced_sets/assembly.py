"""Finite prefixes of the translated union ``F0 = U_n (K*_n + q_n)``.

``K*_n`` is the all-ones piece of length ``n`` and ``q_1, q_2, ...`` is a fixed
enumeration of the rationals. The complements built from ``F0`` in the main
argument (and the G-delta hull of ``F0``) have no finite description and are
not represented here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Tuple

from .construction import BalancedSystem, MultiIndex, elementary_pieces
from .errors import GaugeMismatch, LevelOutOfRange
from .gauge import GaugeFunction, eval_gauge
from .numerics import ClosedInterval, format_rational, parse_rational


def calkin_wilf() -> Iterator[Fraction]:
    """1, 1/2, 2, 1/3, 3/2, 2/3, 3, ... (every positive rational exactly once)."""
    q = Fraction(1)
    while True:
        yield q
        q = 1 / (2 * (q.numerator // q.denominator) - q + 1)


def enumerate_rationals(count: int) -> List[Fraction]:
    """``0``, then each Calkin-Wilf value followed by its negative."""
    if count < 1:
        raise ValueError("count must be positive")
    out = [Fraction(0)]
    for q in calkin_wilf():
        if len(out) >= count:
            break
        out.append(q)
        if len(out) < count:
            out.append(-q)
    assert len(set(out)) == len(out)
    return out


@dataclass(frozen=True)
class FamilyEntry:
    n: int
    star_piece: MultiIndex
    offset: Fraction
    intervals: Tuple[ClosedInterval, ...]


@dataclass(frozen=True)
class TranslatedFamily:
    entries: Tuple[FamilyEntry, ...]
    partial_measure_bound: Fraction
    branching: Tuple[int, ...]
    separations: Tuple[Fraction, ...]

    def to_json(self) -> dict:
        return {
            "branching": list(self.branching),
            "separations": [format_rational(b) for b in self.separations],
            "partial_measure_bound": format_rational(self.partial_measure_bound),
            "entries": [
                {
                    "n": e.n,
                    "star_piece": list(e.star_piece),
                    "offset": format_rational(e.offset),
                    "intervals": [iv.to_json() for iv in e.intervals],
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TranslatedFamily":
        entries = tuple(
            FamilyEntry(
                int(e["n"]), tuple(e["star_piece"]), parse_rational(e["offset"]),
                tuple(ClosedInterval.from_json(iv) for iv in e["intervals"]),
            )
            for e in doc["entries"]
        )
        return cls(
            entries,
            parse_rational(doc["partial_measure_bound"]),
            tuple(doc["branching"]),
            tuple(parse_rational(b) for b in doc["separations"]),
        )


def build_f0_prefix(system: BalancedSystem, count: int) -> TranslatedFamily:
    if not 1 <= count <= system.depth:
        raise LevelOutOfRange(f"count {count} outside 1..{system.depth}")
    offsets = enumerate_rationals(count)
    entries = []
    for n in range(1, count + 1):
        star = (1,) * n
        q = offsets[n - 1]
        ivs = tuple(iv.translate(q) for _, iv in elementary_pieces(system, system.depth, star))
        entries.append(FamilyEntry(n, star, q, ivs))
    bound = sum((Fraction(1, system.counts[n]) for n in range(1, count + 1)), Fraction(0))
    return TranslatedFamily(tuple(entries), bound, system.branching, system.separations)


@dataclass
class F0Bound:
    series: Fraction  # sum of 1 / (a_1 ... a_n), from the branching alone
    recomputed: Fraction  # sum of gauge costs of the translated intervals
    per_entry: List[Fraction]

    @property
    def agrees(self) -> bool:
        return self.series == self.recomputed


def f0_measure_bound(family: TranslatedFamily, h: GaugeFunction) -> F0Bound:
    """Recompute the series from the family's own interval data.

    Each entry's translated finest pieces form a cover of ``K*_n + q_n``;
    its gauge cost depends only on diameters, so it must match
    ``1 / (a_1 ... a_n)`` exactly.
    """
    if h.branching != family.branching or h.separations != family.separations:
        raise GaugeMismatch("gauge breakpoints do not come from the family's source system")
    per_entry = [sum((eval_gauge(h, iv.diameter) for iv in e.intervals), Fraction(0)) for e in family.entries]
    return F0Bound(family.partial_measure_bound, sum(per_entry, Fraction(0)), per_entry)
