"""chiralis: exact rational-function engine for chiral CFTs on the line."""

from .exactnum import (
    GaussRational,
    Point,
    INFINITY,
    Poly,
    RatFunc,
    qi,
)

__all__ = ["GaussRational", "Point", "INFINITY", "Poly", "RatFunc", "qi"]

__version__ = "0.1.0"
