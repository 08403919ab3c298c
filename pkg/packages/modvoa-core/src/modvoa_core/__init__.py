"""
modvoa-core - exact GF(p) kernel shared by the modvoa packages.

Provides residue arithmetic, Lucas binomials, row reduction over GF(p) and
the characteristic-p formal calculus (Hasse derivatives, Taylor shifts).
"""

from modvoa_core.field import (
    DimensionMismatchError,
    FpMatrix,
    NotPrimeError,
    PrimeField,
    SolveMode,
    binom_any,
    binom_mod_p,
    signed_binom,
    solve_linear,
    span_closure,
)
from modvoa_core.formal import LaurentPoly, Window, hasse_derive, multiply, taylor_shift

__version__ = "0.1.0"
__all__ = [
    "DimensionMismatchError",
    "FpMatrix",
    "LaurentPoly",
    "NotPrimeError",
    "PrimeField",
    "SolveMode",
    "Window",
    "binom_any",
    "binom_mod_p",
    "hasse_derive",
    "multiply",
    "signed_binom",
    "solve_linear",
    "span_closure",
    "taylor_shift",
]
