"""Gaussian elimination over an exact field (``Fraction`` or ``RationalFunction``)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .ratfunc import RationalFunction


class SingularMatrixError(ArithmeticError):
    def __init__(self, step: int, size: int):
        self.step = step
        self.size = size
        super().__init__(f"singular matrix: no nonzero pivot in column {step} of {size}")


def pivot_cost(x) -> int:
    """Size measure used to pick pivots; smaller is preferred."""
    if isinstance(x, RationalFunction):
        return x.num.degree + x.den.degree
    if isinstance(x, Fraction):
        return x.numerator.bit_length() + x.denominator.bit_length()
    return 0


def _lifter(A, b):
    symbolic = any(isinstance(v, RationalFunction) for row in A for v in row) or any(
        isinstance(v, RationalFunction) for v in b
    )
    if symbolic:
        return lambda v: v if isinstance(v, RationalFunction) else RationalFunction(v)
    return lambda v: Fraction(v) if isinstance(v, int) else v


def solve_linear(A: Sequence[Sequence], b: Sequence, *, check: bool = True) -> list:
    """Solve ``A x = b`` exactly.

    Pivots are chosen per column as the nonzero candidate of smallest
    :func:`pivot_cost`, ties broken by row order. With ``check`` the
    solution is substituted back and must satisfy the system exactly.
    """
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("matrix must be square")
    if len(b) != n:
        raise ValueError("right-hand side length does not match matrix")
    _lift = _lifter(A, b)
    M = [[_lift(v) for v in row] + [_lift(b[i])] for i, row in enumerate(A)]
    for col in range(n):
        best = None
        for r in range(col, n):
            if M[r][col]:
                cost = pivot_cost(M[r][col])
                if best is None or cost < best[0]:
                    best = (cost, r)
        if best is None:
            raise SingularMatrixError(col, n)
        p = best[1]
        if p != col:
            M[col], M[p] = M[p], M[col]
        inv = 1 / M[col][col]
        pivot_row = M[col]
        for r in range(col + 1, n):
            f = M[r][col]
            if not f:
                continue
            f = f * inv
            row = M[r]
            row[col] = 0 * f
            for c in range(col + 1, n + 1):
                if pivot_row[c]:
                    row[c] = row[c] - f * pivot_row[c]
    x = [None] * n
    for r in range(n - 1, -1, -1):
        acc = M[r][n]
        for c in range(r + 1, n):
            if M[r][c]:
                acc = acc - M[r][c] * x[c]
        x[r] = acc / M[r][r]
    if check:
        for i, row in enumerate(A):
            lhs = 0
            for a, xi in zip(row, x):
                if a:
                    lhs = lhs + a * xi
            if lhs != b[i]:
                raise ArithmeticError(f"back-substitution check failed in row {i}")
    return x
