"""Exact linear algebra over the rationals.

Thin wrappers around :mod:`sympy` matrices that accept and return
:class:`fractions.Fraction` values, so callers never handle sympy types.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import sympy

Rows = Sequence[Sequence[Fraction | int]]


def _to_sympy(rows: Rows, ncols: int | None = None) -> sympy.Matrix:
    if len(rows) == 0:
        return sympy.zeros(0, ncols or 0)
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) if isinstance(x, Fraction)
                          else sympy.Integer(x) for x in row] for row in rows])


def _to_fraction(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


def rank(rows: Rows, ncols: int | None = None) -> int:
    if len(rows) == 0:
        return 0
    return _to_sympy(rows, ncols).rank()


def nullspace(rows: Rows, ncols: int) -> list[tuple[Fraction, ...]]:
    """Basis of {x : A x = 0} for the ``len(rows) x ncols`` matrix A."""
    if len(rows) == 0:
        return [tuple(Fraction(int(i == j)) for i in range(ncols)) for j in range(ncols)]
    return [tuple(_to_fraction(v) for v in vec) for vec in _to_sympy(rows).nullspace()]


def solve(rows: Rows, rhs: Sequence[Fraction | int]) -> tuple[Fraction, ...] | None:
    """One exact solution of A x = b, or None when the system is inconsistent.

    Free parameters, if any, are set to zero.
    """
    A = _to_sympy(rows)
    b = _to_sympy([[v] for v in rhs])
    try:
        sol, params = A.gauss_jordan_solve(b)
    except ValueError:
        return None
    if params.shape[0]:
        sol = sol.subs({p: 0 for p in params})
    return tuple(_to_fraction(v) for v in sol)


def inverse(rows: Rows) -> list[list[Fraction]]:
    M = _to_sympy(rows)
    if M.det() == 0:
        raise ZeroDivisionError("matrix is singular")
    inv = M.inv()
    return [[_to_fraction(inv[i, j]) for j in range(inv.cols)] for i in range(inv.rows)]


def same_kernel(A: Rows, B: Rows, ncols: int) -> bool:
    """True iff ker A == ker B, decided by exact ranks of A, B and [A; B]."""
    ra, rb = rank(A, ncols), rank(B, ncols)
    return ra == rb == rank(list(A) + list(B), ncols)
