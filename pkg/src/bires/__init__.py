"""bires: residual resultants over P1xP1 and tensor product surface
implicitization with exact rational arithmetic."""

__version__ = "0.1.0"

from bires.ring import (  # noqa: F401
    BiDeg, BiPoly, OuterPoly, OuterVar, ParamMonomial, Rat, Universe,
    bidegree_of, format_poly, monomial_basis, parse_poly,
)
