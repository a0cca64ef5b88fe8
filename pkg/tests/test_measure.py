import random
import warnings
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from balanced_sets.construction import BalancedSystem, elementary_pieces
from balanced_sets.errors import (
    BelowResolution,
    CoverageError,
    DegenerateElement,
    GaugeMismatch,
    InsufficientDepth,
    LevelOutOfRange,
)
from balanced_sets.gauge import GaugeFunction, derive_gauge
from balanced_sets.measure import (
    Cover,
    OracleSoundnessWarning,
    canonical_cover,
    certify_lower_bound,
    cover_cost,
    enumerate_min_cover_cost,
    lebesgue_outer_measure,
    min_cover,
    min_cover_cost,
    normalize_cover,
    random_cover,
    uncovered_pieces,
    verify_certificate,
)
from balanced_sets.numerics import ClosedInterval, hull

from conftest import MAIN, SMALL_PLANS, all_indices, system_for


def exhaustive_partition_cost(system, h, m, target=None):
    """Minimum over all 2^(k-1) splittings of the sorted pieces into runs."""
    ivs = sorted((iv for _, iv in elementary_pieces(system, m, target)), key=lambda iv: iv.lo)
    k = len(ivs)
    best = None
    for cuts in product((False, True), repeat=k - 1):
        total, start = Fraction(0), 0
        for pos, cut in enumerate(cuts, start=1):
            if cut:
                total += h(hull(ivs[start:pos]).diameter)
                start = pos
        total += h(hull(ivs[start:]).diameter)
        best = total if best is None else min(best, total)
    return best


# --------------------------------------------------------------------------
# upper bounds

def test_canonical_cover_examples(main_system):
    assert len(canonical_cover(main_system, 4).elements) == 3072
    assert len(canonical_cover(main_system, 2, (1,)).elements) == 2
    with pytest.raises(LevelOutOfRange):
        canonical_cover(main_system, 5)
    with pytest.raises(LevelOutOfRange):
        canonical_cover(main_system, 1, (1, 1))


def test_canonical_costs(main_system, main_gauge):
    for n in range(1, 5):
        assert cover_cost(canonical_cover(main_system, n), main_gauge) == 1
        for k in range(1, n + 1):
            for target in [(1,) * k, tuple(main_system.branching[:k])]:
                got = cover_cost(canonical_cover(main_system, n, target), main_gauge)
                assert got == Fraction(1, main_system.counts[k])


def test_cover_cost_edge_cases(main_gauge):
    assert cover_cost(Cover(()), main_gauge) == 0
    point = ClosedInterval(Fraction(1, 3), Fraction(1, 3))
    assert cover_cost(Cover((point,)), main_gauge) == 0
    tiny = ClosedInterval(0, main_gauge.floor / 2)
    with pytest.raises(BelowResolution) as exc:
        cover_cost(Cover((ClosedInterval(0, 1), tiny)), main_gauge)
    assert exc.value.index == 1


def test_cost_is_additive(main_system, main_gauge):
    a = canonical_cover(main_system, 2)
    b = canonical_cover(main_system, 3, (2,))
    assert cover_cost(a + b, main_gauge) == cover_cost(a, main_gauge) + cover_cost(b, main_gauge)


# --------------------------------------------------------------------------
# DP oracle against independent oracles

@pytest.mark.parametrize("branching", [(2,), (2, 2), (3, 3), (2, 2, 8), (5, 5)])
def test_dp_matches_exhaustive_partitions(branching):
    system = system_for(branching)
    h = derive_gauge(system)
    for m in range(1, system.depth + 1):
        targets = [None] + [(1,) * k for k in range(1, m + 1)]
        for target in targets:
            if len(elementary_pieces(system, m, target)) > 16:
                continue
            expect = exhaustive_partition_cost(system, h, m, target)
            assert min_cover_cost(system, h, m, target) == expect
            k = 0 if target is None else len(target)
            assert expect == Fraction(1, system.counts[k])


def test_dp_examples():
    s22 = system_for((2, 2))
    assert min_cover_cost(s22, derive_gauge(s22), 2) == 1
    s228 = system_for((2, 2, 8))
    assert min_cover_cost(s228, derive_gauge(s228), 3, (1,)) == Fraction(1, 2)
    for branching in SMALL_PLANS:
        s = system_for(branching)
        assert min_cover_cost(s, derive_gauge(s), 1) == 1


def test_dp_main(main_system, main_gauge):
    for m in (3, 4):
        assert min_cover_cost(main_system, main_gauge, m) == 1
        assert min_cover_cost(main_system, main_gauge, m, (1,)) == Fraction(1, 2)


def test_enumeration_matches_dp_at_level3(main_system, main_gauge):
    res = enumerate_min_cover_cost(main_system, main_gauge, 3)
    assert res.cost == 1 and 0 < res.nodes < 2 ** 31
    assert enumerate_min_cover_cost(main_system, main_gauge, 3, (2,)).cost == Fraction(1, 2)


@pytest.mark.parametrize("branching", [(2, 2), (3, 3), (2, 2, 8)])
def test_enumeration_matches_exhaustive(branching):
    system = system_for(branching)
    h = derive_gauge(system)
    m = min(system.depth, 2)
    assert enumerate_min_cover_cost(system, h, m).cost == exhaustive_partition_cost(system, h, m)


def test_dp_runs_reconstruct_cost(main_system, main_gauge):
    res = min_cover(main_system, main_gauge, 3)
    cover = res.as_cover()
    assert cover_cost(cover, main_gauge) == res.cost
    assert not uncovered_pieces(main_system, Cover(cover.elements))
    flat = [i for a, b in res.runs for i in range(a, b + 1)]
    assert flat == list(range(32))


def test_dp_backends_agree(main_system, main_gauge):
    for m, target in [(3, None), (4, None), (4, (2, 1))]:
        a = min_cover(main_system, main_gauge, m, target, backend="numpy")
        b = min_cover(main_system, main_gauge, m, target, backend="numba")
        assert (a.cost, a.runs) == (b.cost, b.runs)


def test_dp_errors(main_system, main_gauge, sys3):
    with pytest.raises(LevelOutOfRange):
        min_cover_cost(main_system, main_gauge, 0)
    with pytest.raises(LevelOutOfRange):
        min_cover_cost(main_system, main_gauge, 1, (1, 1))
    with pytest.raises(GaugeMismatch):
        min_cover_cost(sys3, main_gauge, 2)


def test_noncanonical_system_warns(sys3):
    pieces = dict(sys3.pieces)
    iv = pieces[(1, 1, 1)]
    pieces[(1, 1, 1)] = ClosedInterval(iv.lo, iv.lo + iv.diameter / 2)
    s = BalancedSystem(sys3.plan, pieces, sys3.separations, sys3.phi)
    with pytest.warns(OracleSoundnessWarning):
        res = min_cover(s, derive_gauge(s), 2)
    assert res.warnings


# --------------------------------------------------------------------------
# certificates

def brute_counts(system, m, cover):
    pieces = [iv for _, iv in elementary_pieces(system, m, cover.target)]
    return [sum(1 for p in pieces if e.intersects(p)) for e in cover.elements]


def test_certificate_level1_hulls():
    system = system_for((2, 2, 8))
    h = derive_gauge(system)
    cover = canonical_cover(system, 1)
    cert = certify_lower_bound(system, h, cover)
    assert cert.m == 2
    assert cert.counts == [2, 2]
    assert cert.total == 4 == cert.level_count
    assert cert.values == [Fraction(1, 2), Fraction(1, 2)]
    assert cert.passed and verify_certificate(cert) == []


def test_certificate_rejects_finest_cover(main_system, main_gauge):
    with pytest.raises(InsufficientDepth):
        certify_lower_bound(main_system, main_gauge, canonical_cover(main_system, 4))


def test_certificate_rejects_missing_piece(main_system, main_gauge):
    elements = canonical_cover(main_system, 3).elements
    dropped = elements[5]
    with pytest.raises(CoverageError) as exc:
        certify_lower_bound(main_system, main_gauge, Cover(elements[:5] + elements[6:]))
    assert exc.value.missed[0][:3] == (1, 1, 6)
    assert len(exc.value.missed) == 96
    assert all(main_system.piece(i).intersects(dropped) for i in exc.value.missed)


def test_certificate_rejects_points(main_system, main_gauge):
    p = ClosedInterval(Fraction(1, 2), Fraction(1, 2))
    with pytest.raises(DegenerateElement):
        certify_lower_bound(main_system, main_gauge, Cover((ClosedInterval(0, 1), p)))


@given(st.integers(0, 2 ** 32))
def test_random_covers_certify(seed):
    system = system_for((2, 2, 8))
    h = derive_gauge(system)
    rng = random.Random(seed)
    target = rng.choice([None, (1,), (2, 1)])
    cover = random_cover(system, rng, 2 * system.b(2), target)
    cert = certify_lower_bound(system, h, cover)
    assert cert.counts == brute_counts(system, cert.m, cover)
    assert cert.passed, cert.failures
    assert cover_cost(cover, h) == cert.cost >= cert.bound >= cert.claimed
    assert verify_certificate(cert) == []
    # the DP optimum is a lower bound for every cover of the target
    assert cert.cost >= min_cover_cost(system, h, system.depth, target)


def test_tampered_certificate_fails(main_system, main_gauge):
    cert = certify_lower_bound(main_system, main_gauge, canonical_cover(main_system, 2))
    assert cert.passed
    cert.values[0] = cert.values[0] + 1
    assert any("recomputes" in p for p in verify_certificate(cert))
    cert = certify_lower_bound(main_system, main_gauge, canonical_cover(main_system, 2))
    cert.counts[0] = 0
    assert verify_certificate(cert)


def test_normalized_cover_is_no_cheaper_than_dp(main_system, main_gauge):
    rng = random.Random(7)
    for _ in range(10):
        cover = random_cover(main_system, rng, 2 * main_system.b(3))
        runs = normalize_cover(main_system, cover, 4)
        covered = {i for a, b in runs for i in range(a, b + 1)}
        assert covered == set(range(3072))
        assert cover_cost(cover, main_gauge) >= 1


# --------------------------------------------------------------------------
# Lebesgue decay

def test_lebesgue_examples(main_system):
    s22 = system_for((2, 2))
    assert lebesgue_outer_measure(s22, 1) == 2 * s22.b(1)
    vals = [lebesgue_outer_measure(main_system, n) for n in range(1, 5)]
    assert all(2 * vals[n + 1] <= vals[n] for n in range(3))
    assert vals[3] == 3072 * main_system.b(4) <= vals[0] / 8
    with pytest.raises(LevelOutOfRange):
        lebesgue_outer_measure(main_system, 0)
