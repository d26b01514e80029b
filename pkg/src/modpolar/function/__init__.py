"""Hilbert modules over C[0,1] with polynomial and symbolic elements."""

from .analysis import *  # noqa: F401,F403
from .analysis import __all__ as _analysis_all
from .poly import ONE, ZERO, Abs, Poly, PolyFunction, Product, Sqrt, Sum, sqrt_of
from .roots import roots_in_unit_interval

__all__ = list(_analysis_all) + [
    "ONE", "ZERO", "Abs", "Poly", "PolyFunction", "Product", "Sqrt", "Sum", "sqrt_of",
    "roots_in_unit_interval",
]
