"""Reduced rational functions of ``t`` and their ordering near ``t = 1``."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Union

from .polynomial import Polynomial, format_terms, poly_gcd, zero_order_at_one

_ONE = Polynomial.constant(1)


class RationalFunction:
    """Quotient ``num / den`` of polynomials over the rationals.

    Always stored reduced (``gcd(num, den) == 1``) with a monic denominator,
    so two equal functions have identical representations.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, *, _reduced: bool = False):
        num = _as_poly(num)
        den = _ONE if den is None else _as_poly(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _reduced:
            num, den = _reduce(num, den)
        self.num: Polynomial = num
        self.den: Polynomial = den

    @classmethod
    def t(cls) -> RationalFunction:
        return cls(Polynomial((0, 1)), _reduced=True)

    @classmethod
    def parse(cls, text: str) -> RationalFunction:
        return parse_rational_function(text)

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} depends on t")
        return self.num.lead if self.num else Fraction(0)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RationalFunction(other)
        if isinstance(other, Polynomial):
            other = RationalFunction(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        # polynomials and constants hash like the equal Polynomial / Fraction
        if self.den.is_constant():
            return hash(self.num)
        return hash((self.num, self.den))

    def __repr__(self) -> str:
        return f"RationalFunction({self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _coerce(other) -> RationalFunction:
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, (int, Fraction, Polynomial)):
            return RationalFunction(other, _reduced=True)
        raise TypeError(f"cannot combine RationalFunction with {type(other).__name__}")

    def __neg__(self) -> RationalFunction:
        return RationalFunction(-self.num, self.den, _reduced=True)

    def __add__(self, other) -> RationalFunction:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other) -> RationalFunction:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> RationalFunction:
        return self._coerce(other) - self

    def __mul__(self, other) -> RationalFunction:
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return RationalFunction(0)
            return RationalFunction(self.num.scale(other), self.den, _reduced=True)
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        # cross-cancel first to keep intermediate degrees small
        g1 = poly_gcd(self.num, o.den)
        g2 = poly_gcd(o.num, self.den)
        num = self.num.exact_div(g1) * o.num.exact_div(g2)
        den = self.den.exact_div(g2) * o.den.exact_div(g1)
        lead = den.lead
        return RationalFunction(num.scale(1 / lead), den.scale(1 / lead), _reduced=True)

    __rmul__ = __mul__

    def reciprocal(self) -> RationalFunction:
        if self.num.is_zero():
            raise ZeroDivisionError("reciprocal of the zero rational function")
        lead = self.num.lead
        return RationalFunction(self.den.scale(1 / lead), self.num.scale(1 / lead), _reduced=True)

    def __truediv__(self, other) -> RationalFunction:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other) -> RationalFunction:
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, k: int) -> RationalFunction:
        if k < 0:
            return self.reciprocal() ** (-k)
        return RationalFunction(self.num**k, self.den**k, _reduced=True)

    def __call__(self, x):
        """Evaluate at ``x``; raises ``ZeroDivisionError`` at a pole."""
        d = self.den(x)
        if d == 0:
            raise ZeroDivisionError(f"{self} has a pole at t = {x}")
        n = self.num(x)
        if isinstance(x, (int, Fraction)):
            return Fraction(n) / Fraction(d)
        return n / d

    # -- printing -----------------------------------------------------------

    def integer_pair(self) -> tuple[list[int], list[int]]:
        """Numerator and denominator coefficients (ascending) scaled to coprime integers."""
        coeffs = self.num.coeffs + self.den.coeffs
        m = lcm(*(c.denominator for c in coeffs))
        num_ints = [int(c * m) for c in self.num.coeffs]
        den_ints = [int(c * m) for c in self.den.coeffs]
        g = gcd(*num_ints, *den_ints)
        return [c // g for c in num_ints], [c // g for c in den_ints]

    def to_text(self) -> str:
        """``P(t)`` or ``(P(t))/(Q(t))`` with integer coefficients."""
        num_ints, den_ints = self.integer_pair()
        num_s = format_terms(num_ints)
        if den_ints == [1]:
            return num_s
        return f"({num_s})/({format_terms(den_ints)})"


def _as_poly(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (int, Fraction)):
        return Polynomial.constant(x)
    raise TypeError(f"expected polynomial or rational, got {type(x).__name__}")


def _reduce(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    if num.is_zero():
        return num, _ONE
    if not den.is_constant():
        g = poly_gcd(num, den)
        if not g.is_constant():
            num = num.exact_div(g)
            den = den.exact_div(g)
    lead = den.lead
    if lead != 1:
        num = num.scale(1 / lead)
        den = den.scale(1 / lead)
    return num, den


Field = Union[Fraction, RationalFunction]


# -- sign in a left neighbourhood of 1 -----------------------------------------


@dataclass(frozen=True)
class SignAtOneMinus:
    """Sign of ``f`` on ``(1 - eps, 1)`` and the order of its zero at ``t = 1``.

    ``vanishing_order`` is negative for a pole and meaningless when
    ``sign == 0``.
    """

    sign: int
    vanishing_order: int = 0


def _deflate_sign(num: Polynomial, den: Polynomial) -> SignAtOneMinus:
    if num.is_zero():
        return SignAtOneMinus(0, 0)
    mn, vn = zero_order_at_one(num)
    md, vd = zero_order_at_one(den)
    h1 = vn / vd
    return SignAtOneMinus(1 if h1 > 0 else -1, mn - md)


def sign_near_one(f: RationalFunction) -> SignAtOneMinus:
    """Constant sign of ``f(t)`` for ``t`` slightly below 1.

    Writes ``f = (1 - t)**k * h`` with ``h(1)`` finite and nonzero; since
    ``(1 - t)**k > 0`` for ``t < 1`` the sign is that of ``h(1)``.
    """
    return _deflate_sign(f.num, f.den)


def compare_near_one(f, g) -> int:
    """-1, 0 or +1 as ``f(t)`` is below, equal to or above ``g(t)`` near ``1⁻``."""
    f = RationalFunction._coerce(f)
    g = RationalFunction._coerce(g)
    # sign of f - g without the gcd reduction
    num = f.num * g.den - g.num * f.den
    return _deflate_sign(num, f.den * g.den).sign


# -- text format ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(t)|(\*\*|[-+*/^()]))")


class ParseError(ValueError):
    def __init__(self, text: str, pos: int, message: str):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at column {pos} in {text!r}")


def parse_rational_function(text: str) -> RationalFunction:
    """Parse integer-coefficient arithmetic in ``t``, e.g. ``"1-(1-t)^2"``.

    Grammar: sums and products of integers, ``t`` and parenthesised
    expressions, unary minus, ``/`` and ``^`` (or ``**``) with a
    non-negative integer exponent.
    """
    tokens = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        if not m:
            col = len(stripped) - len(stripped[pos:].lstrip())
            raise ParseError(text, col, "unexpected character")
        kind = "int" if m.group(1) else "t" if m.group(2) else m.group(3)
        if kind == "**":
            kind = "^"
        tokens.append((kind, m.group(1), m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("end", None, len(stripped)))
    parser = _Parser(text, tokens)
    result = parser.expr()
    parser.expect("end")
    return result


class _Parser:
    def __init__(self, text, tokens):
        self.text = text
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.take()
        if tok[0] != kind:
            what = "end of input" if kind == "end" else repr(kind)
            raise ParseError(self.text, tok[2], f"expected {what}")
        return tok

    def expr(self):
        value = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek() in ("*", "/"):
            op, _, pos = self.take()
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ParseError(self.text, pos, "division by zero")
                value = value / rhs
        return value

    def unary(self):
        if self.peek() == "-":
            self.take()
            return -self.unary()
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            kind, digits, pos = self.take()
            if kind != "int":
                raise ParseError(self.text, pos, "exponent must be a non-negative integer")
            return base ** int(digits)
        return base

    def atom(self):
        kind, digits, pos = self.take()
        if kind == "int":
            return RationalFunction(int(digits), _reduced=True)
        if kind == "t":
            return RationalFunction.t()
        if kind == "(":
            value = self.expr()
            self.expect(")")
            return value
        raise ParseError(self.text, pos, "expected a number, 't' or '('")
