import math
from fractions import Fraction

import numpy as np
import pytest

from circlemix import Angle

GOLDEN = (math.sqrt(5) - 1) / 2


def test_golden_and_sqrt2_presets():
    assert Angle.golden().value == pytest.approx(GOLDEN, abs=1e-15)
    assert Angle.sqrt2().value == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    assert Angle.golden().kind == "irrational"


def test_rational_reduction_into_unit_interval():
    a = Angle.rational(5, 4)
    assert a.rat == Fraction(1, 4)
    b = Angle.rational(-1, 4)
    assert b.rat == Fraction(3, 4)
    assert a.kind == "rational"
    assert a.denominator == 4


def test_group_arithmetic_is_exact():
    g = Angle.golden()
    assert (g - g) == Angle.zero()
    assert (g - g).is_rational
    assert (g + Angle.rational(1, 2) - g) == Angle.rational(1, 2)
    # n-fold sum agrees with repeated addition
    acc = Angle.zero()
    for _ in range(7):
        acc = acc + g
    assert acc == g.times(7)


def test_irrational_tag_survives_mixing_with_rationals():
    g = Angle.golden()
    mixed = g + Angle.rational(1, 3)
    assert not mixed.is_rational
    assert mixed.value == pytest.approx((GOLDEN + 1 / 3) % 1.0, abs=1e-12)


def test_distinct_customs_are_independent_generators():
    a = Angle.custom(0.123456789)
    b = Angle.custom(0.987654321)
    assert not (a - b).is_rational
    # same rounded value means the same generator
    assert (a - Angle.custom(0.123456789)).is_rational


def test_custom_rejects_zero():
    with pytest.raises(ValueError):
        Angle.custom(0.0)


def test_frac_multiples_rational_exact():
    a = Angle.rational(3, 7)
    ns = np.arange(-20, 21)
    got = a.frac_multiples(ns)
    want = np.array([(n * 3) % 7 / 7 for n in range(-20, 21)])
    assert np.array_equal(got, want)
    # exact zero at multiples of the denominator
    assert got[20 + 7] == 0.0 and got[20 - 7] == 0.0


def test_frac_multiples_golden_accuracy():
    g = Angle.golden()
    ns = np.array([1, 10, 1000, 100000], dtype=np.int64)
    got = g.frac_multiples(ns)
    for n, v in zip(ns, got):
        assert v == pytest.approx((n * GOLDEN) % 1.0, abs=1e-9)


def test_cell_index_binning():
    assert Angle.rational(1, 4).cell_index(8) == 2
    assert Angle.zero().cell_index(8) == 0
    # cell boundaries are half-open on the right: 1/16 opens cell 1 of 8
    assert Angle.rational(1, 16).cell_index(8) == 1
    assert Angle.golden().cell_index(10) == round(GOLDEN * 10) % 10


def test_spec_roundtrip():
    from circlemix import parse_angle

    for angle in (Angle.rational(3, 8), Angle.golden(), -Angle.sqrt2(), Angle.custom(0.371)):
        again = parse_angle(angle.to_spec(), "t")
        assert again.fixed_point == angle.fixed_point
