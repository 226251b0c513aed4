import cmath
from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from fracspec import _exact


def test_cyclotomic_small_cases():
    assert _exact.cyclotomic(1) == (-1, 1)
    assert _exact.cyclotomic(4) == (1, 0, 1)
    assert _exact.cyclotomic(6) == (1, -1, 1)
    assert _exact.cyclotomic(12) == (1, 0, -1, 0, 1)


@given(st.integers(1, 60))
def test_cyclotomic_roots_are_primitive(n):
    coeffs = _exact.cyclotomic(n)
    z = cmath.exp(2j * cmath.pi / n)
    assert abs(np.polynomial.polynomial.polyval(z, coeffs)) < 1e-8


def test_root_of_unity_sums():
    half = Fraction(1, 2)
    assert _exact.root_of_unity_sum_is_zero([(half, Fraction(0)), (half, half)])
    thirds = [(1, Fraction(k, 3)) for k in range(3)]
    assert _exact.root_of_unity_sum_is_zero(thirds)
    assert not _exact.root_of_unity_sum_is_zero(thirds[:2])
    # 1 + i is not zero, a rational shift of all phases changes nothing
    assert not _exact.root_of_unity_sum_is_zero([(1, Fraction(1, 7)), (1, Fraction(1, 7) + Fraction(1, 4))])


def test_root_order_cap_gives_up():
    assert _exact.root_of_unity_sum_is_zero([(1, Fraction(0)), (1, Fraction(1, 5003))]) is None


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(0, 23)), min_size=1, max_size=6))
def test_root_of_unity_decision_matches_floats(terms):
    terms = [(Fraction(c), Fraction(k, 24)) for c, k in terms]
    exact = _exact.root_of_unity_sum_is_zero(terms)
    value = sum(float(c) * cmath.exp(2j * cmath.pi * float(t)) for c, t in terms)
    assert exact == (abs(value) < 1e-9)


def test_inverse_and_determinant():
    a = ((2, 1), (0, 3))
    inv = _exact.inverse(a)
    assert _exact.matmul(a, inv) == _exact.identity(2)
    assert _exact.determinant(a) == 6
    assert _exact.frac_mod1(Fraction(-1, 3)) == Fraction(2, 3)
