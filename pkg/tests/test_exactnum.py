import math
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from gamx.exactnum import ExactReal, exact_lt, exact_sign


def test_sqrt_normalizes_square_factors():
    assert ExactReal.sqrt(4) == ExactReal.from_rational(2)
    assert ExactReal.sqrt(18) == 3 * ExactReal.sqrt(2)
    assert ExactReal.sqrt(Fraction(1, 2)) == Fraction(1, 2) * ExactReal.sqrt(2)
    assert ExactReal.sqrt(0) == ExactReal.from_rational(0)


def test_field_arithmetic():
    s = ExactReal.sqrt(2)
    x = 1 + 2 * s           # 1 + 2*sqrt(2)
    y = x * x               # 9 + 4*sqrt(2)
    assert y == 9 + 4 * s
    assert (s * s) == ExactReal.from_rational(2)
    assert (ExactReal.sqrt(2) * ExactReal.sqrt(3)) == ExactReal.sqrt(6)
    assert (ExactReal.sqrt(6) * ExactReal.sqrt(10)) == 2 * ExactReal.sqrt(15)


def test_zero_detection_is_exact():
    s2 = ExactReal.sqrt(2)
    assert (s2 - s2).sign() == 0
    assert (s2 + (-1) * s2) == Fraction(0)
    # sqrt(2)*sqrt(8) = 4 exactly
    assert ExactReal.sqrt(2) * ExactReal.sqrt(8) == Fraction(4)


def test_sign_of_close_values():
    # sqrt(2) + sqrt(3) vs pi-ish rational 3.14626436994...: 3146264/10**6 is just below
    v = ExactReal.sqrt(2) + ExactReal.sqrt(3) - Fraction(3146264, 10**6)
    assert v.sign() == 1
    w = ExactReal.sqrt(2) + ExactReal.sqrt(3) - Fraction(3146265, 10**6)
    assert w.sign() == -1


def test_ordering_and_floor():
    s = ExactReal.sqrt(2)
    assert exact_lt(Fraction(1), s)
    assert exact_lt(s, Fraction(3, 2))
    assert s.floor() == 1
    assert (-1 * s).floor() == -2
    assert (3 * s).floor() == 4
    assert ExactReal.from_rational(Fraction(-7, 2)).floor() == -4
    assert ExactReal.from_rational(3).floor() == 3
    assert s.ceil() == 2


@settings(max_examples=200, deadline=None)
@given(
    a=st.fractions(min_value=-10, max_value=10, max_denominator=50),
    b=st.fractions(min_value=-10, max_value=10, max_denominator=50),
    d=st.integers(min_value=0, max_value=60),
)
def test_sign_matches_float(a, b, d):
    value = a + b * ExactReal.sqrt(d)
    approx = float(a) + float(b) * math.sqrt(d)
    if abs(approx) > 1e-9:
        assert exact_sign(value) == (1 if approx > 0 else -1)


@settings(max_examples=200, deadline=None)
@given(
    a=st.fractions(min_value=-5, max_value=5, max_denominator=20),
    b=st.fractions(min_value=-5, max_value=5, max_denominator=20),
    c=st.fractions(min_value=-5, max_value=5, max_denominator=20),
)
def test_mixed_radicand_comparisons(a, b, c):
    value = a + b * ExactReal.sqrt(2) + c * ExactReal.sqrt(5)
    approx = float(a) + float(b) * math.sqrt(2) + float(c) * math.sqrt(5)
    if abs(approx) > 1e-9:
        assert exact_sign(value) == (1 if approx > 0 else -1)
    else:
        # 1, sqrt(2), sqrt(5) are independent over Q
        assert (value.sign() == 0) == (a == 0 and b == 0 and c == 0)
