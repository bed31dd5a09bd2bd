"""Rational inner functions on the polydisk and Dirichlet-type norms."""

__version__ = "0.1.0"

from .polycore import MultiPoly, eval_poly, partial_derivative, reflect  # noqa: E402
from .rif import RIF, build_rif, slice_blaschke  # noqa: E402
from .series import CoeffBox, expand_ratio  # noqa: E402
from .dirichlet import classify_membership, integral_norm_leq0, weighted_partial_sum  # noqa: E402

__all__ = [
    "MultiPoly",
    "eval_poly",
    "partial_derivative",
    "reflect",
    "RIF",
    "build_rif",
    "slice_blaschke",
    "CoeffBox",
    "expand_ratio",
    "classify_membership",
    "integral_norm_leq0",
    "weighted_partial_sum",
]
