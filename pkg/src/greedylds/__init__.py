"""Greedy L2-discrepancy sequences in dimensions 1 to 3, with exact discrepancy tools."""

from .core import CandidateRational, PointSet, candidate_value, read_points, validate_point_set, write_points
from .discrepancy import l2_star_warnock, linf_star, linf_star_exact, linf_star_sampled
from .functional import FunctionalContext, OptimizerConfig, functional_nd, generate_nd, gradient_nd
from .greedy1d import Greedy1D, generate_1d, next_point_bruteforce, next_point_sweep
from .nlp import build_model, check_solution, export_model

__version__ = "0.1.0"

__all__ = [
    "CandidateRational",
    "FunctionalContext",
    "Greedy1D",
    "OptimizerConfig",
    "PointSet",
    "build_model",
    "candidate_value",
    "check_solution",
    "export_model",
    "functional_nd",
    "generate_1d",
    "generate_nd",
    "gradient_nd",
    "l2_star_warnock",
    "linf_star",
    "linf_star_exact",
    "linf_star_sampled",
    "next_point_bruteforce",
    "next_point_sweep",
    "read_points",
    "validate_point_set",
    "write_points",
]
