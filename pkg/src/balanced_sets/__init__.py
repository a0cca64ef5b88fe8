"""Exact finite-depth balanced compact sets, gauges and cover certificates."""

from .assembly import build_f0_prefix, enumerate_rationals, f0_measure_bound
from .construction import (
    BalancedSystem,
    ConstructionPlan,
    IndexFunction,
    build_balanced_system,
    canonical_index_function,
    elementary_pieces,
    validate_balanced,
)
from .contraction import (
    FiniteMap,
    aggregate_overlap_bound,
    an_sweep,
    analyze_child_intersections,
    bound_overlap_measure,
    check_overlap_decomposition,
    check_weak_contraction,
    find_fixed_points,
    random_weak_contraction,
)
from .gauge import GaugeFunction, check_linear_minorant, derive_gauge, eval_gauge
from .measure import (
    Cover,
    canonical_cover,
    certify_lower_bound,
    cover_cost,
    enumerate_min_cover_cost,
    lebesgue_outer_measure,
    min_cover,
    min_cover_cost,
    verify_certificate,
)
from .numerics import ClosedInterval, Rational, as_rational

__version__ = "0.1.0"

__all__ = [
    "BalancedSystem", "ClosedInterval", "ConstructionPlan", "Cover", "FiniteMap",
    "GaugeFunction", "IndexFunction", "Rational", "aggregate_overlap_bound", "an_sweep",
    "analyze_child_intersections", "as_rational", "bound_overlap_measure",
    "build_balanced_system", "build_f0_prefix", "canonical_cover",
    "canonical_index_function", "certify_lower_bound", "check_linear_minorant",
    "check_overlap_decomposition", "check_weak_contraction", "cover_cost", "derive_gauge",
    "elementary_pieces", "enumerate_min_cover_cost", "enumerate_rationals", "eval_gauge",
    "f0_measure_bound", "find_fixed_points", "lebesgue_outer_measure", "min_cover",
    "min_cover_cost", "random_weak_contraction", "validate_balanced", "verify_certificate",
]
