"""Shared hypothesis strategies and sympy conversions for the test suite."""

from fractions import Fraction

import sympy
from hypothesis import strategies as st

from pmpg.algebra import Polynomial, RationalFunction

T = sympy.Symbol("t")

small_fractions = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))


def polynomials(max_degree: int = 4):
    return st.lists(small_fractions, max_size=max_degree + 1).map(Polynomial)


def nonzero_polynomials(max_degree: int = 4):
    return polynomials(max_degree).filter(lambda p: not p.is_zero())


def rational_functions(max_degree: int = 3):
    return st.builds(RationalFunction, polynomials(max_degree), nonzero_polynomials(max_degree))


def to_sympy(p) -> sympy.Expr:
    if isinstance(p, RationalFunction):
        return to_sympy(p.num) / to_sympy(p.den)
    return sum((sympy.Rational(c.numerator, c.denominator) * T**i for i, c in enumerate(p.coeffs)), sympy.Integer(0))


def sympy_poly(p: Polynomial) -> sympy.Poly:
    return sympy.Poly(to_sympy(p), T, domain="QQ")


def from_sympy_poly(q: sympy.Poly) -> Polynomial:
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(q.all_coeffs())]
    return Polynomial(coeffs)
