from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eftlab.gaussian import GaussRat
from eftlab.modforms import delta, delta_inv, eta
from eftlab.qseries import (
    CycInt,
    NonUnitError,
    QSeries,
    RingError,
    qs_add,
    qs_inv,
    qs_mul,
    qs_scale_exponent,
    t_transform,
)

import oracles


def q(e, c=1, prec=10):
    return QSeries.monomial(Fraction(e), c, prec)


# -- fixed vectors -----------------------------------------------------------


def test_difference_of_squares():
    a = QSeries({0: 1, 1: 1}, 1, 10)
    b = QSeries({0: 1, 1: -1}, 1, 10)
    out = qs_mul(a, b)
    assert out == QSeries({0: 1, 2: -1}, 1, 10)
    assert out.prec == 10


def test_fractional_exponents_add():
    out = q(Fraction(1, 24), prec=2) * q(Fraction(1, 48), prec=2)
    assert out.denom == 48
    assert dict(out) == {Fraction(1, 16): 1}


def test_delta_times_inverse_is_one():
    d = delta(10)
    di = delta_inv(10)
    prod = qs_mul(d, di)
    assert prod.agrees_with(QSeries.one(prod.prec))
    assert prod.prec >= 9


def test_geometric_series_inverse():
    out = qs_inv(QSeries({0: 1, 1: -1}, 1, 8))
    assert out == QSeries({k: 1 for k in range(8)}, 1, 8)


def test_shifted_inverse():
    out = qs_inv(QSeries({1: 1, 2: -1}, 1, 8))
    assert out.valuation() == -1
    assert out == QSeries({k: 1 for k in range(-1, 6)}, 1, 6)


def test_inverse_of_delta_matches_product_formula():
    di = delta_inv(12)
    ref = oracles.geometric_product(14)
    assert [di.coeff(k) for k in range(-1, 12)] == ref[:13]


def test_non_unit_inverse_rejected():
    with pytest.raises(NonUnitError):
        qs_inv(QSeries({0: 2, 1: 1}, 1, 5))
    with pytest.raises(NonUnitError):
        qs_inv(QSeries.zero(5))


def test_rational_inverse_allowed():
    out = qs_inv(QSeries({0: 2, 1: 1}, 1, 4, ring="rat"))
    assert out.ring == "rat"
    assert out.coeff(0) == Fraction(1, 2)
    assert out.coeff(1) == Fraction(-1, 4)


def test_scale_exponent():
    assert dict(qs_scale_exponent(q(1), 2)) == {Fraction(2): 1}
    half = qs_scale_exponent(QSeries({1: 1}, 2, 3), Fraction(1, 2))
    assert half.denom == 4
    assert dict(half) == {Fraction(1, 4): 1}


def test_eta_of_two_tau():
    e2 = qs_scale_exponent(eta(5), 2)
    ref = oracles.euler_product(10, 1, step=2)
    for k in range(9):
        assert e2.coeff(Fraction(1, 12) + k) == ref[k]


def test_t_transform_integer_exponent_fixed():
    f = QSeries({-1: 1, 0: 744, 1: 196884}, 1, 2)
    assert t_transform(f) == f.to_ring("cyc48")


def test_t_transform_half_exponent_sign():
    out = t_transform(QSeries({1: 1}, 2, 2))
    assert out.coeff(Fraction(1, 2)) == CycInt.from_int(-1)


def test_t_transform_odd_half_shift():
    body = QSeries({0: 3, 1: -5, 2: 7}, 1, 3)
    f = body.shift(Fraction(-1, 2))
    assert t_transform(f) == f.scale(-1).to_ring("cyc48")


def test_zeta_reduction_against_long_division():
    for k in range(0, 96):
        assert CycInt.zeta(k).coeffs == tuple(oracles.zeta48_power_reduced(k % 48))


def test_zeta24_is_minus_one():
    assert CycInt.zeta(24) == CycInt.from_int(-1)
    assert CycInt.zeta(48) == CycInt.from_int(1)


def test_ring_join_rat_with_cyc_refused():
    a = QSeries({0: Fraction(1, 2)}, 1, 3)
    b = t_transform(QSeries({1: 1}, 2, 3))
    with pytest.raises(RingError):
        qs_add(a, b)


def test_coeff_past_precision_raises():
    with pytest.raises(ValueError):
        QSeries({0: 1}, 1, 3).coeff(3)


def test_gaussrat_parse():
    assert GaussRat.parse("1/2+3i") == GaussRat(Fraction(1, 2), 3)
    assert GaussRat.parse("i") == GaussRat(0, 1)
    assert GaussRat.parse("-2/3 i") == GaussRat(0, Fraction(-2, 3))
    assert GaussRat.parse("5") == GaussRat(5, 0)
    with pytest.raises(ValueError):
        GaussRat.parse("x")


def test_gaussrat_mod1():
    assert GaussRat(Fraction(7, 4), 2).mod1() == GaussRat(Fraction(3, 4), 2)
    assert GaussRat(Fraction(-1, 4), 1).mod1() == GaussRat(Fraction(3, 4), 1)


# -- properties --------------------------------------------------------------

coeffs = st.lists(st.integers(-20, 20), min_size=1, max_size=8)


def series(c, start=0, prec=8):
    return QSeries({start + i: x for i, x in enumerate(c)}, 1, prec)


@given(coeffs, coeffs, coeffs)
def test_mul_associative_commutative(a, b, c):
    A, B, C = series(a), series(b), series(c)
    assert (A * B) * C == A * (B * C)
    assert A * B == B * A


@given(coeffs, coeffs, coeffs)
def test_distributive(a, b, c):
    A, B, C = series(a), series(b), series(c)
    assert (A * (B + C)).agrees_with(A * B + A * C)


@given(st.lists(st.integers(-9, 9), min_size=0, max_size=7), st.sampled_from([1, -1]), st.integers(-3, 3))
def test_inverse_roundtrip(tail, unit, v):
    a = QSeries({v + i: x for i, x in enumerate([unit] + tail)}, 1, v + 8)
    prod = a * qs_inv(a)
    assert prod.agrees_with(QSeries.one(prod.prec))


@given(st.dictionaries(st.integers(-48, 96), st.integers(-5, 5), max_size=8))
def test_t_transform_order_48(terms):
    f = QSeries(terms, 48, 3)
    g = f
    for _ in range(48):
        g = t_transform(g)
    assert g == f.to_ring("cyc48")


@given(st.dictionaries(st.integers(-24, 48), st.integers(-9, 9), max_size=8), st.sampled_from([1, 2, 24, 48]))
def test_json_roundtrip(terms, denom):
    f = QSeries({k: v for k, v in terms.items()}, denom, 2)
    assert QSeries.from_json(f.to_json()) == f
    g = t_transform(f.with_denom(48))
    assert QSeries.from_json(g.to_json()) == g


@given(st.integers(0, 200), st.integers(0, 200))
def test_zeta_powers_multiply(j, k):
    assert CycInt.zeta(j) * CycInt.zeta(k) == CycInt.zeta(j + k)
    assert CycInt.zeta(k).root_of_unity_index() == k % 48


@settings(max_examples=50)
@given(st.fractions(min_value=-3, max_value=3, max_denominator=6), st.fractions(min_value=0, max_value=3, max_denominator=6))
def test_gaussrat_str_roundtrip(re, im):
    z = GaussRat(re, im)
    assert GaussRat.parse(str(z)) == z
