"""Set-multilinear polynomials, partial derivative rank measures and formula tools."""

__version__ = "0.1.0"
