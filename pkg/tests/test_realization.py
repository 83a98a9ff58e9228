import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eftlab.modforms import ModularFunctionSpec, eval_mf_spec, j_function
from eftlab.moduli import ALL_SPIN, PP, S, T, check_section_equivariance
from eftlab.qseries import QSeries
from eftlab.realization import (
    RealizationError,
    SpinTheoryData,
    TheoryData,
    a_operator,
    build_from_series,
    lambda_pair,
    partition,
    rho,
    spin_partition,
    spin_section,
    verify_conditions,
)


def j_theory(trunc=8):
    return build_from_series(j_function(trunc + 1))


def test_constant_one():
    th = build_from_series(QSeries.one(5))
    assert th.pole == 0 and th.dims == (1, 0, 0, 0, 0)


def test_j_dims():
    th = j_theory()
    assert th.pole == 1 and th.trunc == 8
    assert th.dim(-1) == 1 and th.dim(0) == 744 and th.dim(1) == 196884


def test_negative_rejected():
    with pytest.raises(RealizationError, match="negative"):
        build_from_series(j_function(5).scale(-1))


def test_fractional_exponent_rejected():
    with pytest.raises(RealizationError):
        build_from_series(QSeries({1: 1}, 2, 3))


def test_rational_coefficient_rejected():
    with pytest.raises(RealizationError):
        build_from_series(QSeries({0: Fraction(1, 2)}, 1, 3))


def test_rho_constant_theory():
    th = build_from_series(QSeries.one(3))
    assert rho(th, 0.3) == {0: 1.0}
    assert rho(th, 0.7) == rho(th, 0.3)


def test_rho_j_block_one():
    th = j_theory()
    r = rho(th, 0.1 + 0.2j)
    assert r[1] == pytest.approx(0.1 + 0.2j)
    assert th.dim(1) == 196884


def test_rho_dense_symmetric():
    rng = random.Random(3)
    for _ in range(5):
        th = TheoryData(1, 2, tuple(rng.randint(0, 3) for _ in range(4)))
        qv = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        m = rho(th, qv, dense=True)
        assert np.allclose(m, m.T)


def test_lambda_orthonormal_and_linear():
    th = TheoryData(0, 1, (2, 1))
    eye = np.eye(3)
    for i in range(3):
        for k in range(3):
            assert lambda_pair(th, eye[i], eye[k]) == (1 if i == k else 0)
    assert lambda_pair(th, (2 + 1j) * eye[0], eye[0]) == 2 + 1j


@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=3, max_size=3),
       st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=3, max_size=3))
def test_lambda_symmetric(v, w):
    th = TheoryData(0, 1, (2, 1))
    assert lambda_pair(th, v, w) == pytest.approx(lambda_pair(th, w, v))


def test_a_operator_semigroup():
    th = TheoryData(1, 3, (1, 2, 0, 3, 1))
    a1, a2, a12 = a_operator(th, 0.1), a_operator(th, 0.2), a_operator(th, 0.02)
    assert a_operator(th, 0.5)[0] == 1
    for k in a1:
        assert a1[k] * a2[k] == pytest.approx(a12[k], rel=1e-14)


@settings(max_examples=25)
@given(st.integers(0, 2**32))
def test_a_tensor_a_moves_rho(seed):
    rng = random.Random(seed)
    th = TheoryData(1, 2, tuple(rng.randint(0, 2) for _ in range(4)))
    q, q1, q2 = (complex(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)) for _ in range(3))
    A1, A2 = a_operator(th, q1, dense=True), a_operator(th, q2, dense=True)
    lhs = A1 @ rho(th, q, dense=True) @ A2.T
    rhs = rho(th, q * q1 * q2, dense=True)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("j_poly", [(1,), (0, 1), (0, 0, 1), (3, 1, 2)])
def test_partition_roundtrip(j_poly):
    f = eval_mf_spec(ModularFunctionSpec(j_poly), 11)
    assert partition(build_from_series(f)) == f


@given(st.lists(st.integers(0, 1000), min_size=1, max_size=12), st.integers(0, 3))
def test_partition_roundtrip_random(coeffs, pole):
    coeffs[0] = coeffs[0] or 1
    f = QSeries({i - pole: c for i, c in enumerate(coeffs)}, 1, len(coeffs) - pole)
    assert partition(build_from_series(f)) == f


def test_spin_sectors_all_equal():
    f = j_function(9)
    sth = SpinTheoryData.uniform(build_from_series(f))
    for s in ALL_SPIN:
        assert spin_partition(sth, s) == f


def test_flip_plus_negates_only_pp():
    f = j_function(9)
    sth = SpinTheoryData.uniform(build_from_series(f), flip_plus=True)
    for s in ALL_SPIN:
        want = f.scale(-1) if s == PP else f
        assert spin_partition(sth, s) == want


def test_flipped_section_is_equivariant():
    f = j_function(26)
    sec = spin_section(SpinTheoryData.uniform(build_from_series(f), flip_plus=True))
    for A in (S, T):
        assert check_section_equivariance(sec, A, tol=1e-6).passed


def test_conditions_on_j():
    sth = SpinTheoryData.uniform(build_from_series(j_function(26)))
    entries = {e["condition"]: e for e in verify_conditions(sth, tol=1e-6)}
    assert entries["a"]["status"] == "pass" and entries["a"]["deviation"] == 0.0
    assert entries["b"]["status"] == "pass" and entries["b"]["deviation"] == 0.0
    assert entries["c"]["status"] == "pass"
    assert entries["d"]["status"] == "pass" and entries["d"]["deviation"] <= 1e-6


def test_asymmetric_rho_fails_symmetry():
    th = TheoryData(0, 0, (2,), rho_forms={0: ((Fraction(1), Fraction(1)), (Fraction(0), Fraction(1)))})
    entries = {e["condition"]: e for e in verify_conditions(SpinTheoryData.uniform(th), tol=1e-6)}
    assert entries["a"]["status"] == "fail"


def test_short_truncation_reports_precision_error():
    sth = SpinTheoryData.uniform(j_theory(8))
    entries = {e["condition"]: e for e in verify_conditions(sth, tol=1e-6)}
    assert entries["d"]["status"] == "error"
    assert "tail" in entries["d"]["detail"]


def test_json_roundtrip():
    th = TheoryData(0, 0, (2,), rho_forms={0: ((Fraction(1), Fraction(1, 2)), (Fraction(1, 2), Fraction(1)))})
    sth = SpinTheoryData(th, j_theory(3), True)
    back = SpinTheoryData.from_json(sth.to_json())
    assert back == sth
    assert back.plus_sector.rho_form(0) == th.rho_form(0)


def test_bad_dims_length():
    with pytest.raises(RealizationError):
        TheoryData(1, 2, (1, 2))
