"""Robust multivariate polynomial regression on [-1,1]^n.

Recovers a polynomial of bounded individual degree from noisy samples, a
constant fraction of which are arbitrary outliers, by iterating per-cell
medians over a Chebyshev-extrema grid with a minimax LP fit.
"""

from .lp_core import LinearProgram, LpError, LpSolution, linf_fit, solve, weighted_l1_fit
from .partition import ChebPartition, alpha_goodness, build_partition, cell_of, goodness_threshold
from .polynomial import (
    MultiPoly,
    UniPoly,
    add,
    chebyshev_t,
    coeff_abs_sum,
    evaluate,
    l1_norm,
    legendre_p,
    legendre_p_derivative,
    scale,
    sub,
    sup_norm,
)
from .regression import (
    FitReport,
    RecoveryConfig,
    RecoveryError,
    finite_precision_recover,
    median_recover,
    median_recover_with_l1,
    refine,
    sift_finite_precision,
)
from .sampling import NoiseModel, SampleSet, draw_points, label_points, round_bits

__version__ = "0.1.0"

__all__ = [
    "ChebPartition",
    "FitReport",
    "LinearProgram",
    "LpError",
    "LpSolution",
    "MultiPoly",
    "NoiseModel",
    "RecoveryConfig",
    "RecoveryError",
    "SampleSet",
    "UniPoly",
    "add",
    "alpha_goodness",
    "build_partition",
    "cell_of",
    "chebyshev_t",
    "coeff_abs_sum",
    "draw_points",
    "evaluate",
    "finite_precision_recover",
    "goodness_threshold",
    "l1_norm",
    "label_points",
    "legendre_p",
    "legendre_p_derivative",
    "linf_fit",
    "median_recover",
    "median_recover_with_l1",
    "refine",
    "round_bits",
    "scale",
    "sift_finite_precision",
    "solve",
    "sub",
    "sup_norm",
    "weighted_l1_fit",
]
