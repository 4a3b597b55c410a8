"""Exact polynomial and rational-function arithmetic over the rationals."""

from .linear import SingularMatrixError, solve_linear
from .polynomial import Polynomial, poly_gcd, zero_order_at_one
from .ratfunc import (
    ParseError,
    RationalFunction,
    SignAtOneMinus,
    compare_near_one,
    parse_rational_function,
    sign_near_one,
)
from .sturm import count_roots, count_roots_left_closed, sturm_sequence

__all__ = [
    "ParseError",
    "Polynomial",
    "RationalFunction",
    "SignAtOneMinus",
    "SingularMatrixError",
    "compare_near_one",
    "count_roots",
    "count_roots_left_closed",
    "parse_rational_function",
    "poly_gcd",
    "sign_near_one",
    "solve_linear",
    "sturm_sequence",
    "zero_order_at_one",
]
