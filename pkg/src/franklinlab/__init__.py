"""Exact Franklin/Haar analysis on the torus with an inequality-verification harness."""

from .dyadic import NodeSet, DyadicInterval, build_nodes, locate_dyadic
from .pwl import PiecewiseLinear, StepFunction, inner_product, l2_norm, lp_norm
from .franklin import FranklinBasis, franklin_function, reconstruct_u, kernel, kernel_row, fit_decay
from .haar import (haar_partial_sum, haar_increment, square_function,
                   dyadic_maximal, maximal_function, four_point_maximal)
from .lab import ExperimentReport, demo_convergence
from .growth import GrowthEstimate, run_maximal_bound
from .multipliers import MultiplierReport, check_multiplier_condition

__all__ = [
    "NodeSet", "DyadicInterval", "build_nodes", "locate_dyadic",
    "PiecewiseLinear", "StepFunction", "inner_product", "l2_norm", "lp_norm",
    "FranklinBasis", "franklin_function", "reconstruct_u", "kernel", "kernel_row", "fit_decay",
    "haar_partial_sum", "haar_increment", "square_function",
    "dyadic_maximal", "maximal_function", "four_point_maximal",
    "ExperimentReport", "demo_convergence",
    "GrowthEstimate", "run_maximal_bound",
    "MultiplierReport", "check_multiplier_condition",
]

__version__ = "0.1.0"
