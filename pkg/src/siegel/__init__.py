"""Numerics for Bergman-space theory on the Siegel upper half-space."""

from .geometry import HPoint, BPoint, DomainError, DimensionError
from .integrate import QuadratureSpec, IntegralResult
from .symbols import Symbol, make_symbol

__version__ = "0.1.0"

__all__ = [
    "HPoint",
    "BPoint",
    "DomainError",
    "DimensionError",
    "QuadratureSpec",
    "IntegralResult",
    "Symbol",
    "make_symbol",
]
