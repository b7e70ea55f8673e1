"""Exact rational linear algebra on small integer/rational matrices.

Stoichiometric vectors are integers, so orthogonality and rank questions
are answered without rounding. Complex entries are handled as Gaussian
rationals (pairs of fractions) for the determinant oracle.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from itertools import combinations
from math import gcd
from typing import Sequence

import numpy as np


def to_fractions(rows) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in rows]


def rref(rows) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals.

    Returns the nonzero rows of the RREF and the pivot column indices.
    """
    a = to_fractions(rows)
    if not a:
        return [], []
    nrows, ncols = len(a), len(a[0])
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][col]
        a[r] = [x / p for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
        if r == nrows:
            break
    return a[:r], pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def nullspace(rows, n: int | None = None) -> list[list[Fraction]]:
    """Rational basis of {x : A x = 0}.

    ``n`` gives the column count when ``rows`` is empty.
    """
    rows = [list(r) for r in rows]
    if not rows:
        if n is None:
            raise ValueError("column count required for an empty matrix")
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    ncols = len(rows[0])
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def primitive_integer(v: Sequence[Fraction]) -> list[int]:
    """Scale a rational vector to the primitive integer vector on its ray."""
    fr = [Fraction(x) for x in v]
    den = reduce(lambda a, b: a * b // gcd(a, b), (x.denominator for x in fr), 1)
    ints = [int(x * den) for x in fr]
    g = reduce(gcd, (abs(i) for i in ints), 0)
    if g == 0:
        return ints
    return [i // g for i in ints]


def extreme_rays(rows, n: int) -> list[list[int]]:
    """Extreme rays of the cone {x >= 0 : A x = 0}, as primitive integer vectors.

    Brute-force support enumeration: a ray's support T is minimal, so
    ker(A[:, T]) is one-dimensional and spanned by a strictly positive
    vector. Supports never exceed rank(A) + 1. Exponential in ``n``.
    """
    rows = [list(r) for r in rows if any(x != 0 for x in r)]
    rk = rank(rows) if rows else 0
    rays = []
    for size in range(1, min(n, rk + 1) + 1):
        for support in combinations(range(n), size):
            sub = [[row[j] for j in support] for row in rows]
            ker = nullspace(sub, n=size) if sub else nullspace([], n=size)
            if len(ker) != 1:
                continue
            v = ker[0]
            if all(x > 0 for x in v):
                pass
            elif all(x < 0 for x in v):
                v = [-x for x in v]
            else:
                continue
            full = [Fraction(0)] * n
            for j, x in zip(support, v):
                full[j] = x
            rays.append(primitive_integer(full))
    return rays


class _GaussRational:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __sub__(self, o):
        return _GaussRational(self.re - o.re, self.im - o.im)

    def __mul__(self, o):
        return _GaussRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    def __truediv__(self, o):
        den = o.re * o.re + o.im * o.im
        return _GaussRational(
            (self.re * o.re + self.im * o.im) / den, (self.im * o.re - self.re * o.im) / den
        )

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0


def _as_gauss(x) -> _GaussRational:
    if isinstance(x, (int, Fraction)):
        return _GaussRational(x)
    z = complex(x)
    return _GaussRational(Fraction(z.real), Fraction(z.imag))


def exact_determinant(m) -> tuple[Fraction, Fraction]:
    """Exact determinant of a real or complex matrix with float/rational entries.

    Every float is converted to the rational it represents exactly, so the
    result is the determinant of the matrix as stored. Returns (re, im).
    """
    arr = np.asarray(m)
    n = arr.shape[0]
    if arr.shape != (n, n):
        raise ValueError("square matrix required")
    a = [[_as_gauss(x) for x in row] for row in arr.tolist()]
    det = _GaussRational(1)
    sign = 1
    for col in range(n):
        piv = next((i for i in range(col, n) if not a[i][col].is_zero()), None)
        if piv is None:
            return Fraction(0), Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        p = a[col][col]
        det = det * p
        for i in range(col + 1, n):
            if a[i][col].is_zero():
                continue
            f = a[i][col] / p
            a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return sign * det.re, sign * det.im
