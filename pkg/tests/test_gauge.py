from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from balanced_sets.errors import BelowResolution, DomainError
from balanced_sets.gauge import (
    GaugeFunction,
    check_linear_minorant,
    derive_gauge,
    eval_gauge,
    gauge_samples,
)
from balanced_sets.numerics import hull_diameter
from balanced_sets.construction import elementary_pieces

from conftest import SMALL_PLANS, system_for


def oracle_h(a, b, x):
    """Closed-form piecewise definition, evaluated case by case."""
    N = len(a)
    P = [1]
    for v in a:
        P.append(P[-1] * v)
    if x == 0:
        return Fraction(0)
    if x >= 2 * b[0]:
        return Fraction(1)
    for n in range(1, N + 1):
        bn = b[n - 1]
        if bn <= x <= 2 * bn:
            return Fraction(1, P[n]) + (x - bn) / bn * (Fraction(1, P[n - 1]) - Fraction(1, P[n]))
        if n < N and 2 * b[n] <= x <= bn:
            return Fraction(1, P[n])
    raise AssertionError("below resolution")


def test_examples(main_system, main_gauge):
    h = main_gauge
    b = main_system.separations
    assert h(b[2]) == Fraction(1, 32)
    assert h(0) == 0
    assert h(2 * b[0]) == 1 and h(Fraction(7)) == 1
    assert h((b[0] + 2 * b[0]) / 2) == (Fraction(1, 2) + 1) / 2
    assert h(2 * b[1]) == Fraction(1, 2)
    with pytest.raises(BelowResolution) as exc:
        h(b[3] / 2)
    assert exc.value.floor == b[3]
    with pytest.raises(DomainError):
        h(Fraction(-1))


def test_breakpoint_values(main_system, main_gauge):
    P = main_system.counts
    for n in range(1, 5):
        assert eval_gauge(main_gauge, main_system.b(n)) * P[n] == 1
        assert eval_gauge(main_gauge, 2 * main_system.b(n)) == Fraction(1, P[n - 1])


def test_breakpoint_table(main_gauge):
    xs = [x for x, _ in main_gauge.breakpoints]
    assert xs == sorted(xs) and len(set(xs)) == len(xs)
    assert main_gauge.breakpoints[0] == (0, 0)
    assert len(main_gauge.breakpoints) == 9
    kinds = [k for _, _, k in main_gauge.segments()]
    assert kinds == ["linear", "constant", "linear", "constant", "linear", "constant", "linear"]


@pytest.mark.parametrize("branching", SMALL_PLANS)
def test_matches_closed_form(branching):
    system = system_for(branching)
    h = derive_gauge(system)
    for x, _ in gauge_samples(h, 97):
        assert h(x) == oracle_h(system.branching, system.separations, x)


@given(st.data())
def test_monotone_and_matches_oracle(main_gauge, data):
    h = main_gauge
    lo, hi = h.floor, 3 * h.separations[0]
    grid = st.fractions(min_value=lo, max_value=hi, max_denominator=1 << 34)
    x, y = data.draw(grid), data.draw(grid)
    assume(x <= y)
    assert h(x) <= h(y)
    assert h(x) == oracle_h(h.branching, h.separations, x)


def test_continuity_at_breakpoints(main_gauge):
    eps = Fraction(1, 1 << 80)
    for x, y in main_gauge.breakpoints[1:]:
        assert main_gauge(x) == y
        left, right = main_gauge(x - eps) if x - eps >= main_gauge.floor else y, main_gauge(x + eps)
        assert abs(left - y) < Fraction(1, 1 << 40) and abs(right - y) < Fraction(1, 1 << 40)


def test_rejects_non_decaying_separations():
    with pytest.raises(DomainError):
        GaugeFunction((2, 2), (Fraction(1, 8), Fraction(1, 16)))
    with pytest.raises(DomainError):
        GaugeFunction((2,), (Fraction(0),))
    with pytest.raises(DomainError):
        GaugeFunction((2, 2), (Fraction(1, 8),))


def test_minorant_passes_on_build(main_system, main_gauge):
    c = hull_diameter(iv for _, iv in elementary_pieces(main_system, 1))
    report = check_linear_minorant(main_gauge, c)
    assert report.passed and report.witness is None
    assert report.checks[0] == (0, 0, 0)
    assert "breakpoint" in report.note
    # the inequality b_n <= c / (a_1...a_n) at every level
    for n in range(1, 5):
        assert main_system.b(n) <= c / main_system.counts[n]


def test_minorant_fails_with_inflated_b1():
    # b1/c > 1/a1 once b1 is inflated
    h = GaugeFunction((2, 2), (Fraction(3, 4), Fraction(1, 128)))
    report = check_linear_minorant(h, Fraction(1))
    assert not report.passed
    assert report.witness == Fraction(3, 4)


def test_minorant_rejects_nonpositive_c(main_gauge):
    with pytest.raises(DomainError):
        check_linear_minorant(main_gauge, 0)


def test_samples(main_gauge):
    samples = gauge_samples(main_gauge, 64)
    assert len(samples) == 64
    assert all(y == main_gauge(x) for x, y in samples)
    assert [x for x, _ in samples] == sorted(x for x, _ in samples)


def test_json_roundtrip(main_gauge):
    doc = main_gauge.to_json()
    assert GaugeFunction.from_json(doc) == main_gauge
    doc["breakpoints"][3][1] = "1/5"
    with pytest.raises(DomainError):
        GaugeFunction.from_json(doc)


def test_scaled_form_is_exact(main_gauge):
    g = main_gauge.scaled()
    for x, y in main_gauge.breakpoints[1:]:
        X = x * g.den
        assert X.denominator == 1 and (y * g.scale).denominator == 1
