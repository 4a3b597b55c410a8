"""Real root counting with Sturm sequences."""

from __future__ import annotations

from fractions import Fraction

from .polynomial import Polynomial, poly_gcd


def square_free_part(p: Polynomial) -> Polynomial:
    if p.is_constant():
        return p
    return p.exact_div(poly_gcd(p, p.derivative()))


def sturm_sequence(p: Polynomial) -> list[Polynomial]:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        seq.append(-(seq[-2] % seq[-1]))
    seq.pop()
    return seq


def _variations(seq: list[Polynomial], x: Fraction) -> int:
    signs = [v > 0 for v in (q(x) for q in seq) if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(p: Polynomial, a, b) -> int:
    """Number of distinct real roots of ``p`` in the half-open interval ``(a, b]``."""
    if p.is_zero():
        raise ValueError("the zero polynomial has infinitely many roots")
    a, b = Fraction(a), Fraction(b)
    if a >= b:
        return 0
    q = square_free_part(p)
    if q.is_constant():
        return 0
    seq = sturm_sequence(q)
    return _variations(seq, a) - _variations(seq, b)


def count_roots_left_closed(p: Polynomial, a, b) -> int:
    """Number of distinct real roots of ``p`` in ``[a, b)``."""
    a, b = Fraction(a), Fraction(b)
    n = count_roots(p, a, b)
    if p(a) == 0:
        n += 1
    if p(b) == 0 and a < b:
        n -= 1
    return n
