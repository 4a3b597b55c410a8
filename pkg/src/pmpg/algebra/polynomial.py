"""Dense univariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Union

Scalar = Union[int, Fraction]


class Polynomial:
    """Polynomial in ``t``; ``coeffs[i]`` is the coefficient of ``t**i``.

    Instances are immutable and always canonical: trailing zero
    coefficients are stripped, so the zero polynomial has ``coeffs == ()``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Scalar] = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def constant(cls, c: Scalar) -> Polynomial:
        return cls((c,))

    @classmethod
    def monomial(cls, degree: int, c: Scalar = 1) -> Polynomial:
        return cls([0] * degree + [c])

    @classmethod
    def one_minus_t_power(cls, k: int) -> Polynomial:
        """(1 - t)**k."""
        return cls((1, -1)) ** k

    # -- basic properties ---------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Polynomial.constant(other).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        # constants hash like the equal Fraction
        if len(self.coeffs) <= 1:
            return hash(self.coeffs[0] if self.coeffs else Fraction(0))
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Polynomial({[str(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        return format_terms(self.coeffs)

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _coerce(other) -> Polynomial:
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other)
        raise TypeError(f"cannot combine Polynomial with {type(other).__name__}")

    def __neg__(self) -> Polynomial:
        return Polynomial(-c for c in self.coeffs)

    def __add__(self, other) -> Polynomial:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(out)

    __radd__ = __add__

    def __sub__(self, other) -> Polynomial:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> Polynomial:
        return self._coerce(other) - self

    def __mul__(self, other) -> Polynomial:
        if isinstance(other, (int, Fraction)):
            return Polynomial(c * other for c in self.coeffs)
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not self.coeffs or not o.coeffs:
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Polynomial:
        if k < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __divmod__(self, other) -> tuple[Polynomial, Polynomial]:
        d = self._coerce(other)
        if d.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dd = d.degree
        if len(rem) - 1 < dd:
            return Polynomial(), self
        quot = [Fraction(0)] * (len(rem) - dd)
        inv_lead = 1 / d.lead
        for k in range(len(rem) - 1 - dd, -1, -1):
            q = rem[k + dd] * inv_lead
            quot[k] = q
            if q:
                for j, c in enumerate(d.coeffs):
                    rem[k + j] -= q * c
        return Polynomial(quot), Polynomial(rem[:dd])

    def __floordiv__(self, other) -> Polynomial:
        return divmod(self, other)[0]

    def __mod__(self, other) -> Polynomial:
        return divmod(self, other)[1]

    def exact_div(self, other) -> Polynomial:
        q, r = divmod(self, other)
        if r:
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def scale(self, c: Scalar) -> Polynomial:
        return Polynomial(x * c for x in self.coeffs)

    def monic(self) -> Polynomial:
        if not self.coeffs:
            return self
        return self.scale(1 / self.lead)

    def __call__(self, x):
        """Horner evaluation; ``x`` may be any ring element (int, Fraction, float, ...)."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> Polynomial:
        return Polynomial(i * c for i, c in enumerate(self.coeffs) if i)

    # -- integer views ------------------------------------------------------

    def integer_coeffs(self) -> tuple[Fraction, list[int]]:
        """Return ``(d, ints)`` with ``self == Polynomial(ints) / d``.

        ``ints`` is primitive (coefficient gcd 1) with positive leading
        coefficient, so ``d`` carries the sign.
        """
        if not self.coeffs:
            return Fraction(1), []
        den = reduce(lcm, (c.denominator for c in self.coeffs), 1)
        ints = [int(c * den) for c in self.coeffs]
        content = reduce(gcd, ints, 0)
        if ints[-1] < 0:
            content = -content
        return Fraction(den, content), [i // content for i in ints]


def format_terms(coeffs) -> str:
    """Render coefficients (ascending order) as ``3*t^2 - t + 1/2``."""
    if not any(coeffs):
        return "0"
    parts = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = Fraction(coeffs[i])
        if c == 0:
            continue
        mag = abs(c)
        if i == 0:
            body = str(mag)
        else:
            mono = "t" if i == 1 else f"t^{i}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts)


# -- gcd ---------------------------------------------------------------------


def _primitive(ints: list[int]) -> list[int]:
    while ints and ints[-1] == 0:
        ints.pop()
    if not ints:
        return ints
    g = reduce(gcd, ints, 0)
    if ints[-1] < 0:
        g = -g
    return [c // g for c in ints]


def _prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of ``a`` by ``b`` over the integers."""
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    while len(r) - 1 >= db and r:
        lr = r[-1]
        shift = len(r) - 1 - db
        r = [c * lb for c in r]
        for j, c in enumerate(b):
            r[shift + j] -= lr * c
        r.pop()  # leading term cancels by construction
        while r and r[-1] == 0:
            r.pop()
    return r


def poly_gcd(p: Polynomial, q: Polynomial) -> Polynomial:
    """Monic gcd via the primitive polynomial remainder sequence.

    ``gcd(0, 0)`` is the zero polynomial.
    """
    if p.is_zero():
        return q.monic()
    if q.is_zero():
        return p.monic()
    if p.is_constant() or q.is_constant():
        return Polynomial.constant(1)
    a = p.integer_coeffs()[1]
    b = q.integer_coeffs()[1]
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _primitive(_prem(a, b))
        a, b = b, r
        if len(b) == 1:
            return Polynomial.constant(1)
    return Polynomial(a).monic()


# -- behaviour at t = 1 -------------------------------------------------------


def zero_order_at_one(p: Polynomial) -> tuple[int, Fraction]:
    """Return ``(m, v)`` with ``p = (1 - t)**m * h``, ``h(1) = v != 0``."""
    if p.is_zero():
        raise ValueError("zero polynomial has no finite order at t = 1")
    m = 0
    coeffs = list(p.coeffs)
    while True:
        # synthetic division by (t - 1)
        n = len(coeffs) - 1
        quot = [Fraction(0)] * n
        acc = Fraction(0)
        for i in range(n, 0, -1):
            acc = acc + coeffs[i]
            quot[i - 1] = acc
        value = acc + coeffs[0]
        if value != 0:
            return m, value
        # p = (t - 1) * quot = (1 - t) * (-quot)
        coeffs = [-c for c in quot]
        m += 1
