import os
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import HealthCheck, settings

from balanced_sets import build_balanced_system, derive_gauge
from balanced_sets.construction import ConstructionPlan

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

MAIN = (2, 2, 8, 96)
SMALL_PLANS = [(2,), (2, 2), (3, 3), (2, 2, 8), (2, 4, 16), (5, 5)]
RELAXED_PLANS = [(2, 2, 2), (3, 2, 2, 2)]


@pytest.fixture(scope="session")
def main_system():
    return build_balanced_system(ConstructionPlan(MAIN))


@pytest.fixture(scope="session")
def main_gauge(main_system):
    return derive_gauge(main_system)


@pytest.fixture(scope="session")
def sys3():
    return build_balanced_system(ConstructionPlan((2, 2, 8)))


_cache = {}


def system_for(branching, strict=True):
    key = (tuple(branching), strict)
    if key not in _cache:
        _cache[key] = build_balanced_system(ConstructionPlan(branching, strict_growth=strict))
    return _cache[key]


def all_indices(branching, n):
    return list(product(*(range(1, a + 1) for a in branching[:n])))


def F(x):
    return Fraction(x)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
