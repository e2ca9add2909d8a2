"""Exact rational linear algebra, delegated to sympy."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import sympy

from .exact import LinComb


def _to_sympy(rows: Sequence[Sequence]) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) if isinstance(x, Fraction)
                          else sympy.Integer(x) for x in row] for row in rows])


def _from_sympy(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


def inverse(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    m = _to_sympy(rows)
    if m.shape[0] != m.shape[1] or m.det() == 0:
        raise ZeroDivisionError("singular matrix")
    inv = m.inv()
    return [[_from_sympy(inv[i, j]) for j in range(inv.shape[1])] for i in range(inv.shape[0])]


def rank_matrix(rows: Sequence[Sequence]) -> int:
    if not rows or not rows[0]:
        return 0
    return _to_sympy(rows).rank()


def rank(vectors: Sequence[LinComb]) -> int:
    """Rank of a family of linear combinations (as row vectors)."""
    keys = sorted({k for v in vectors for k in v}, key=repr)
    if not keys or not vectors:
        return 0
    index = {k: i for i, k in enumerate(keys)}
    rows = [[Fraction(0)] * len(keys) for _ in vectors]
    for r, v in enumerate(vectors):
        for k, c in v.items():
            rows[r][index[k]] = c
    return _to_sympy(rows).rank()


def solve(columns: Sequence[LinComb], target: LinComb) -> list[Fraction] | None:
    """Find ``x`` with ``sum(x[i] * columns[i]) == target``; ``None`` if impossible.

    Free variables are set to zero.
    """
    keys = sorted({k for v in list(columns) + [target] for k in v}, key=repr)
    if not keys:
        return [Fraction(0)] * len(columns)
    index = {k: i for i, k in enumerate(keys)}
    a = sympy.zeros(len(keys), len(columns))
    for j, col in enumerate(columns):
        for k, c in col.items():
            a[index[k], j] = sympy.Rational(c.numerator, c.denominator)
    b = sympy.zeros(len(keys), 1)
    for k, c in target.items():
        b[index[k], 0] = sympy.Rational(c.numerator, c.denominator)
    aug = a.row_join(b)
    red, pivots = aug.rref()
    if len(columns) in pivots:
        return None
    x = [Fraction(0)] * len(columns)
    for row, p in enumerate(pivots):
        x[p] = _from_sympy(red[row, len(columns)])
    return x


def kernel(columns: Sequence[LinComb]) -> list[list[Fraction]]:
    """Basis of ``{x : sum(x[i] * columns[i]) == 0}``."""
    keys = sorted({k for v in columns for k in v}, key=repr)
    if not columns:
        return []
    if not keys:
        return [[Fraction(int(i == j)) for i in range(len(columns))] for j in range(len(columns))]
    index = {k: i for i, k in enumerate(keys)}
    a = sympy.zeros(len(keys), len(columns))
    for j, col in enumerate(columns):
        for k, c in col.items():
            a[index[k], j] = sympy.Rational(c.numerator, c.denominator)
    return [[_from_sympy(v[i]) for i in range(len(columns))] for v in a.nullspace()]


def combine(coeffs: Sequence, vectors: Sequence[LinComb]) -> LinComb:
    out = LinComb.zero()
    for c, v in zip(coeffs, vectors):
        if c:
            out = out + v.scale(c)
    return out

