"""Pushforward moment hierarchies for upper bounds on rational-function minima."""

from .hierarchies import (
    HierarchyConfig,
    HierarchyResult,
    run_sweep,
    upper_bound_poly,
    upper_bound_poly_pushforward,
    upper_bound_rational,
    upper_bound_rational_pushforward,
    upper_bound_sum,
    upper_bound_sum_pushforward,
)
from .moments import BoxLebesgue, MomentTable, SphereUniform, TableBuilder, integrate, make_oracle
from .polyarith import MultiPoly
from .problems import Problem, gen_example1, gen_random_rayleigh, gen_random_sum, parse_problem

__version__ = "0.1.0"

__all__ = [
    "BoxLebesgue",
    "HierarchyConfig",
    "HierarchyResult",
    "MomentTable",
    "MultiPoly",
    "Problem",
    "SphereUniform",
    "TableBuilder",
    "gen_example1",
    "gen_random_rayleigh",
    "gen_random_sum",
    "integrate",
    "make_oracle",
    "parse_problem",
    "run_sweep",
    "upper_bound_poly",
    "upper_bound_poly_pushforward",
    "upper_bound_rational",
    "upper_bound_rational_pushforward",
    "upper_bound_sum",
    "upper_bound_sum_pushforward",
]
