from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from eftlab.clifford import (
    ADOPTED,
    CERT_SAMPLES,
    CliffordElt,
    Convention,
    FockModule,
    Poly,
    b_operator,
    b_traces,
    convention_oracle,
    periodicity_certificate,
    sector_series,
)
from eftlab.modforms import delta, eta
from eftlab.moduli import MM, MP, PM, PP
from eftlab.qseries import qs_inv, qs_scale_exponent

import oracles


def test_oracle_selects_one_labeling():
    res = convention_oracle()
    passing = [c for c, ok in res["results"].items() if ok]
    assert len(res["results"]) == 8
    assert passing == [ADOPTED]
    assert ADOPTED == Convention(-1, "e", True)


def test_fock_relations():
    mod = FockModule(ADOPTED)
    assert mod.relations_hold()
    e, f = CliffordElt.basis("e"), CliffordElt.basis("f")
    assert e * e == CliffordElt.scalar(0) and f * f == CliffordElt.scalar(0)
    assert e * f + f * e == CliffordElt.scalar(-2)


@pytest.mark.parametrize("m", [Fraction(k, 2) for k in range(1, 101)])
def test_traces_all_modes(m):
    st_, tr = b_traces(m)
    x = Poly.q(m)
    assert st_ == Poly.const(1) - x
    assert tr == Poly.const(1) + x


def test_b_operator_spectrum_on_vacuum():
    b = b_operator(3)
    assert b[0][0] == Poly.q(3) and b[1][1] == Poly.const(1)
    assert b[0][1] == Poly() and b[1][0] == Poly()


def test_q_to_one_limit():
    st_, tr = b_traces(Fraction(5, 2))
    assert st_.subs_one() == 0 and tr.subs_one() == 2
    b = b_operator(Fraction(5, 2))
    assert [[x.subs_one() for x in row] for row in b] == [[1, 0], [0, 1]]


def test_b_operator_rejects_bad_mode():
    with pytest.raises(ValueError):
        b_operator(0)
    with pytest.raises(ValueError):
        b_operator(Fraction(1, 3))


def test_pp_sector_is_delta_squared():
    s = sector_series(PP, 48, 25, 20).series
    d = delta(20)
    assert s.reduced().agrees_with(d * d, 20)
    assert s.reduced().agrees_with((eta(20) ** 48).reduced(), 20)


def test_mp_sector_eta_quotient():
    s = sector_series(MP, 2, 25, 10).series
    e2 = qs_scale_exponent(eta(12), 2)
    ref = (e2 * e2 * qs_inv(eta(12) * eta(12))).scale(2)
    assert s.agrees_with(ref, 10)


def _odd_mode_product(n, length):
    # prod over odd k of (1 - x^k)^n in x = q^(1/2)
    out = [1] + [0] * (length - 1)
    for k in range(1, length, 2):
        factor = [0] * length
        factor[0], factor[k] = 1, -1
        out = oracles.poly_mul(out, oracles.poly_pow(factor, n, length), length)
    return out


def test_pm_sector_leading_term_and_body():
    s = sector_series(PM, 24, 25, 10).series
    assert s.valuation() == Fraction(-1, 2)
    ref = _odd_mode_product(24, 20)
    for i, c in enumerate(ref):
        assert s.coeff(Fraction(-1, 2) + Fraction(i, 2)) == c


def test_mm_sector_is_pm_with_signs_flipped():
    pm = sector_series(PM, 4, 25, 6).series
    mm = sector_series(MM, 4, 25, 6).series
    for e, c in pm:
        k = (e + Fraction(1, 12)) * 2
        assert mm.coeff(e) == c * (-1) ** int(k)


def test_prec_beyond_cutoff_rejected():
    with pytest.raises(ValueError):
        sector_series(PP, 2, 5, 10)
    with pytest.raises(ValueError):
        sector_series(PP, 3, 25, 10)


def _t_ratios(cert):
    return {e["sector"]: (e["ratio"], e["status"]) for e in cert.entries if e["check"] == "exact"}


def test_certificate_n24_sign_flip():
    cert = periodicity_certificate(24, 25, 20)
    assert not cert.passed
    r = _t_ratios(cert)
    assert r["+-"] == ("-1", "fail") and r["--"] == ("-1", "fail")
    assert r["++"][1] == "pass" and r["-+"][1] == "pass"


def test_certificate_n48_passes():
    cert = periodicity_certificate(48, 25, 20)
    assert cert.passed
    numeric = [e for e in cert.entries if e["check"] == "numeric"]
    assert len(numeric) == 4 * len(CERT_SAMPLES)
    assert max(e["deviation"] for e in numeric) <= 1e-6


def test_certificate_n2_primitive_24th_root():
    cert = periodicity_certificate(2, 25, 10)
    ratio, status = _t_ratios(cert)["+-"]
    assert status == "fail"
    assert cert.t_ratio("+-") == ratio
    from eftlab.qseries import CycInt

    k = next(k for k in range(48) if str(CycInt.zeta(k)) == ratio)
    assert k % 2 == 0 and (k // 2) % 2 == 1 and (k // 2) % 3 != 0


@given(st.fractions(min_value=Fraction(1, 2), max_value=50).filter(lambda m: (2 * m).denominator == 1))
def test_supertrace_plus_trace_is_two(m):
    st_, tr = b_traces(m)
    assert st_ + tr == Poly.const(2)
