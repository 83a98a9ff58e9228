from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from eftlab.modforms import (
    FORMS,
    ModularFunctionSpec,
    c4,
    c6,
    delta,
    delta_inv,
    eta,
    eval_mf_spec,
    j_function,
    sigma,
)
from eftlab.qseries import QSeries

import oracles


def test_sigma_small():
    assert sigma(3, 1) == 1
    assert sigma(3, 2) == 9
    assert sigma(5, 2) == 33


@given(st.integers(0, 6), st.integers(1, 400))
def test_sigma_matches_brute_force(k, n):
    assert sigma(k, n) == oracles.sigma_brute(k, n)


def test_sigma_rejects_zero():
    with pytest.raises(ValueError):
        sigma(3, 0)


def test_eisenstein_leading_terms():
    assert c4(3).coefficient_list(0, 3) == [1, 240, 2160]
    assert c6(2).coefficient_list(0, 2) == [1, -504]
    assert c4(12).coefficient_list(0, 12) == oracles.eisenstein(240, 3, 12)
    assert c6(12).coefficient_list(0, 12) == oracles.eisenstein(-504, 5, 12)


def test_delta_leading_terms():
    assert delta(4).coefficient_list(0, 4) == [0, 1, -24, 252]


def test_delta_matches_ramanujan_tau():
    d = delta(30)
    assert d.coefficient_list(0, 30) == oracles.ramanujan_tau(30)


def test_delta_inv_start_and_sign():
    di = delta_inv(30)
    assert di.coeff(-1) == 1 and di.coeff(0) == 24
    assert di.is_nonnegative() and di.is_integral()
    assert [di.coeff(k) for k in range(-1, 30)] == oracles.geometric_product(31)


def test_j_leading_terms():
    j = j_function(2)
    assert [j.coeff(k) for k in (-1, 0, 1)] == [1, 744, 196884]


def test_j_against_independent_expansion():
    j = j_function(20)
    ref = oracles.j_coeffs(22)
    assert [j.coeff(k) for k in range(-1, 20)] == ref[:21]


def test_ring_relation_to_order_50():
    a, b = c4(50), c6(50)
    rel = a * a * a - b * b - delta(50).scale(1728)
    assert rel.is_zero() and rel.prec == 50


def test_eta_leading_terms():
    e = eta(3)
    assert e.valuation() == Fraction(1, 24)
    assert e.coeff(Fraction(25, 24)) == -1
    assert e.coeff(Fraction(49, 24)) == -1


def test_eta24_is_delta():
    assert (eta(20) ** 24).reduced().agrees_with(delta(20))


def test_eta48_is_delta_squared():
    d = delta(20)
    assert (eta(20) ** 48).reduced().agrees_with(d * d, 20)


def test_spec_zero_and_identity():
    assert eval_mf_spec(ModularFunctionSpec((0,)), 5) == QSeries.zero(5)
    assert eval_mf_spec(ModularFunctionSpec((0, 1)), 10) == j_function(10)


def test_spec_shift_kills_constant():
    f = eval_mf_spec(ModularFunctionSpec((744, -1)), 5).scale(-1)
    assert f.coeff(0) == 0
    assert f.coeff(-1) == 1


def test_spec_parse():
    s = ModularFunctionSpec.parse("1, 0, 2")
    assert s.j_poly == (1, 0, 2) and s.degree == 2


def test_j_squared_prefix():
    f = eval_mf_spec(ModularFunctionSpec((0, 0, 1)), 3)
    j = j_function(5)
    assert f.agrees_with(j * j, 3)
    assert f.coeff(-2) == 1 and f.coeff(-1) == 1488


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=3), st.integers(2, 8))
def test_spec_is_linear(cs, prec):
    f = eval_mf_spec(ModularFunctionSpec(tuple(cs)), prec)
    g = eval_mf_spec(ModularFunctionSpec(tuple(2 * c for c in cs)), prec)
    assert g == f.scale(2)


def test_forms_table_names():
    assert set(FORMS) == {"c4", "c6", "delta", "delta-inv", "j", "eta"}
    for name, fn in FORMS.items():
        assert fn(4).is_integral(), name
