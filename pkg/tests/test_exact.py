from fractions import Fraction

import numpy as np
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from catalyx import exact

int_rows = st.integers(1, 4).flatmap(
    lambda m: st.integers(m, 6).flatmap(
        lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


def test_rref_small():
    red, piv = exact.rref([[2, 4], [1, 3]])
    assert piv == [0, 1]
    assert red == [[1, 0], [0, 1]]


def test_nullspace_empty_matrix_is_identity():
    ns = exact.nullspace([], n=3)
    assert ns == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_primitive_integer():
    assert exact.primitive_integer([Fraction(1, 2), Fraction(-3, 4), 0]) == [2, -3, 0]
    assert exact.primitive_integer([0, 0]) == [0, 0]


@settings(max_examples=150, deadline=None)
@given(int_rows)
def test_rank_and_nullspace_match_sympy(rows):
    m = sympy.Matrix(rows)
    assert exact.rank(rows) == m.rank()
    ns = exact.nullspace(rows)
    assert len(ns) == len(sympy_nullspace := m.nullspace())
    for v in ns:
        assert all(sum(a * x for a, x in zip(r, v)) == 0 for r in rows)
    if ns:
        # same span: stacking does not increase the rank
        both = sympy.Matrix([list(v) for v in ns] + [list(v.T) for v in sympy_nullspace])
        assert both.rank() == len(ns)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-4, 4), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_determinant_matches_sympy_integer(rows):
    re, im = exact.exact_determinant(rows)
    assert im == 0
    assert re == sympy.Matrix(rows).det()


def test_determinant_complex_float_entries():
    m = np.array([[1 + 2j, 0.5], [0.25j, 3.0]])
    re, im = exact.exact_determinant(m)
    ref = sympy.Matrix([[1 + 2 * sympy.I, sympy.Rational(1, 2)], [sympy.I / 4, 3]]).det()
    assert re == sympy.re(ref) and im == sympy.im(ref)


def test_determinant_duplicated_row_is_zero():
    assert exact.exact_determinant([[0.1, 0.7, 1.3], [0.1, 0.7, 1.3], [2.0, 1.0, 0.0]]) == (0, 0)


def test_extreme_rays_of_simple_cone():
    # {x >= 0 : -x1 - x2 + x3 = 0} has rays (1,0,1) and (0,1,1)
    rays = sorted(exact.extreme_rays([[-1, -1, 1]], 3))
    assert rays == [[0, 1, 1], [1, 0, 1]]


def test_extreme_rays_none_when_cone_trivial():
    assert exact.extreme_rays([[1, 1]], 2) == []
