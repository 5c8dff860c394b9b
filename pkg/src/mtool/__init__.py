"""Exact-arithmetic workbench for finitely additive measures on the Cantor algebra."""

from .algebra import Clopen, FiniteMeasure, RatInterval, lebesgue, measure_eval, fn_dist
from .codings import WeightFn, measure_from_weights, equiv_c, psi_encode, encode_ideal, range_code
from .jordan import JordanAlgebra, Selector, SpineMeasure, SpinePartition

__all__ = [
    "Clopen", "FiniteMeasure", "RatInterval", "lebesgue", "measure_eval", "fn_dist",
    "WeightFn", "measure_from_weights", "equiv_c", "psi_encode", "encode_ideal", "range_code",
    "JordanAlgebra", "Selector", "SpineMeasure", "SpinePartition",
]
