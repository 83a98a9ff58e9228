import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eftlab.bordism import (
    RULES,
    Atom,
    BordWord,
    NoMatchError,
    SpinMismatchError,
    check_invariance,
    evaluate,
    evaluate_dense,
    find_matches,
    maps_close,
    normalize,
    planted_word,
    random_word,
    rewrite_step,
    tau_sum,
    typecheck,
)
from eftlab.gaussian import GaussRat
from eftlab.modforms import j_function
from eftlab.realization import TheoryData, build_from_series, partition

ID, SWAP = Atom("Id"), Atom("Swap")
TOY = TheoryData(1, 2, (1, 2, 0, 1))


def A(kind, tau=None, spin=None):
    return Atom(kind, GaussRat.parse(tau) if tau is not None else None, spin)


def word(*layers, in_arity=None):
    return BordWord([list(layer) for layer in layers], in_arity)


def test_atom_validation():
    with pytest.raises(ValueError):
        A("R", "1/2")  # R needs im > 0
    with pytest.raises(ValueError):
        Atom("Id", GaussRat(0, 1))
    with pytest.raises(ValueError):
        A("C", "-i")
    assert A("C", "5/4+i").tau == GaussRat(Fraction(1, 4), 1)


def test_typecheck_vectors():
    tc = typecheck(word([A("R", "i")], [A("L", "0")]))
    assert tc.ok and (tc.in_arity, tc.out_arity) == (0, 0)
    tc = typecheck(word([A("C", "i")]))
    assert tc.ok and (tc.in_arity, tc.out_arity) == (1, 1)
    tc = typecheck(word([A("L", "i")], [A("R", "i")], in_arity=0))
    assert not tc.ok and tc.layer == 0


def test_typecheck_mismatch_inside():
    tc = typecheck(word([A("C", "i")], [A("L", "i")]))
    assert not tc.ok and tc.layer == 1


def test_r1_swap_into_cap():
    res = normalize(word([SWAP], [A("L", "i")]))
    assert str(res.word) == "[L(0+1i)]"
    assert [t["rule"] for t in res.trace] == ["R1"]


def test_r7_cylinders():
    w = word([A("C", "1/3")], [A("C", "1/4+i")])
    assert find_matches(w, "R7")
    out = rewrite_step(w, "R7")
    assert out == word([A("C", "7/12+i")])


def test_r4_snake():
    w = word([A("R", "i"), ID], [ID, A("L", "0")])
    assert rewrite_step(w, "R4") == word([A("C", "i")])
    mirror = word([ID, A("R", "i")], [A("L", "1/2"), ID])
    assert rewrite_step(mirror, "R4") == word([A("C", "1/2+i")])


def test_normal_forms():
    res = normalize(word([A("R", "i")], [A("L", "1/2")]))
    assert res.word == word([A("T", "1/2+i")])
    res = normalize(word([A("C", "1/3")], [A("C", "1/4+i")], [A("C", "i")]))
    assert res.word == word([A("C", "7/12+2i")])
    assert [t["rule"] for t in res.trace] == ["R7", "R7"]
    res = normalize(word([A("R", "i"), A("R", "i")], [ID, A("L", "1/2"), ID]))
    assert res.word == word([A("R", "1/2+2i")])


def test_no_match():
    with pytest.raises(NoMatchError):
        rewrite_step(word([A("C", "i")]), "R7")


def test_spin_mismatch():
    w = word([A("C", "i", "+")], [A("C", "i", "-")])
    with pytest.raises(SpinMismatchError):
        rewrite_step(w, "R7")


def test_budget_exceeded():
    w = word(*[[A("C", "i")] for _ in range(6)])
    res = normalize(w, budget=2)
    assert not res.ok and res.status == "budget_exceeded"


def test_json_roundtrip():
    w = word([A("R", "i"), ID], [ID, A("L", "1/3", "+")])
    assert BordWord.from_json(w.to_json()) == w


def test_closed_word_is_partition_value():
    th = build_from_series(j_function(9))
    for tau in (0.1 + 1.2j, -0.3 + 0.9j):
        t = GaussRat(Fraction(tau.real).limit_denominator(100), Fraction(tau.imag).limit_denominator(100))
        v = evaluate(word([Atom("R", t)], [A("L", "0")]), th).value()
        assert v == pytest.approx(partition(th).evaluate(complex(t)), rel=1e-9)


def test_cylinder_block_scalars():
    m = evaluate(word([A("C", "1/4+i")]), TOY)
    qv = np.exp(2j * np.pi * complex(0.25, 1))
    arr = m.block_array()
    assert m.blocks == [-1, 0, 2]
    for idx, k in enumerate(m.blocks):
        assert arr[idx] == pytest.approx(qv**k)


def test_dense_oracle_on_fixed_words():
    for w in (word([A("R", "i"), ID], [ID, A("L", "0")]), word([SWAP], [A("L", "i")]), word([A("R", "1/2+i")], [SWAP])):
        ok, dev = maps_close(evaluate(w, TOY), evaluate(normalize(w).word, TOY))
        assert ok
        assert np.allclose(evaluate(w, TOY).to_dense(), evaluate_dense(w, TOY))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_random_words_typecheck_and_normalize(seed):
    rng = random.Random(seed)
    w = random_word(rng)
    assert typecheck(w).ok and len(w.layers) <= 12
    res = normalize(w)
    assert res.ok
    assert tau_sum(res.word) == tau_sum(w)
    assert normalize(res.word).word == res.word
    ok, dev = maps_close(evaluate(w, TOY), evaluate(res.word, TOY))
    assert ok, dev


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32))
def test_evaluate_matches_dense_oracle(seed):
    rng = random.Random(seed)
    w = random_word(rng, max_layers=6, max_arity=3)
    assert np.allclose(evaluate(w, TOY).to_dense(), evaluate_dense(w, TOY), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("rule", RULES)
def test_each_rule_preserves_value(rule):
    rng = random.Random(RULES.index(rule))
    for _ in range(10):
        w = planted_word(rule, rng)
        v = rewrite_step(w, rule)
        assert typecheck(v).ok
        ok, dev = maps_close(evaluate(w, TOY), evaluate(v, TOY))
        assert ok, (rule, str(w), dev)


def test_invariance_on_j_theory():
    th = build_from_series(j_function(9))
    entries = check_invariance(th, seed=0, n_words=20)
    assert all(e["status"] == "pass" for e in entries)


FORMS_TOY = TheoryData(
    0, 1, (2, 1),
    rho_forms={0: ((Fraction(2), Fraction(1)), (Fraction(1), Fraction(3)))},
    lambda_forms={0: ((Fraction(1), Fraction(1, 2)), (Fraction(1, 2), Fraction(1)))},
)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32))
def test_explicit_forms_match_dense_oracle(seed):
    w = random_word(random.Random(seed), max_layers=6, max_arity=3)
    assert np.allclose(evaluate(w, FORMS_TOY).to_dense(), evaluate_dense(w, FORMS_TOY), rtol=1e-9, atol=1e-12)
