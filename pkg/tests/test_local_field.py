from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from motivic_wf.local_field import (
    INF,
    BudgetError,
    DEFAULT_MODULI,
    FieldInputError,
    LocalField,
    PrecisionError,
    ResidueField,
    in_ball,
    inner_product,
    is_irreducible,
    vec_sub,
)

K3 = LocalField.make(3)


@st.composite
def elements(draw, K: LocalField = K3, lo: int = -3, hi: int = 4):
    terms = {k: draw(st.integers(0, K.q - 1)) for k in range(lo, hi)}
    return K.element(terms)


def test_arith_examples():
    K = K3
    x = K.t(-1) + K.one()
    assert x + (-K.t(-1)) == K.one()
    assert K.t(2) * K.t(-2) == K.one()
    assert (K.t(3) + K.t(5)).ord() == 3


def test_precision_rules():
    K = K3
    a = K.element({0: 1, 1: 2}, prec=3)
    b = K.element({0: 2}, prec=5)
    assert (a + b).prec == 3
    c = K.element({1: 1}, prec=4)
    assert (a * c).prec == min(a.ord() + c.prec, c.ord() + a.prec)
    gone = K.element({0: 1}, prec=2) - K.element({0: 1}, prec=2)
    with pytest.raises(PrecisionError):
        gone.ord()


def test_ord_ac_of_zero():
    assert K3.zero().ord() == INF
    assert K3.zero().ac() == 0


@pytest.mark.parametrize("text,want", [("t^1*[1]", 0), ("t^0*[1]", 1), ("t^-1*[1] + t^0*[2]", 2)])
def test_character_exponent_examples(text, want):
    assert K3.parse(text).character_exponent() == want


def test_character_exponent_needs_t0():
    with pytest.raises(PrecisionError):
        K3.element({-3: 1}, prec=-1).character_exponent()


def test_inner_product_examples():
    K = K3
    assert inner_product((K.one(), K.zero()), (K.zero(), K.one())).is_zero()
    assert inner_product((K.t(1),), (K.t(-1),)) == K.one()
    ip = inner_product((K.one(), K.one()), (K.one(), K.from_int(2)))
    assert ip.character_exponent() == 0


@pytest.mark.parametrize("q,m,alpha,D,count", [(3, 1, 0, 1, 3), (3, 1, 0, 2, 9), (2, 2, -1, 0, 4)])
def test_enumerate_counts(q, m, alpha, D, count):
    K = LocalField.make(q)
    reps = K.enumerate_coset_reps(K.zeros(m), alpha, D)
    assert len(reps) == count
    assert K.count_coset_reps(m, alpha, D) == count


def test_enumerate_unit_ball_depth_one():
    K = K3
    reps = K.enumerate_coset_reps((K.zero(),), 0, 1)
    assert [r[0] for r in reps] == [K.zero(), K.one(), K.from_int(2)]


def test_enumerate_is_deterministic_and_lazy_matches():
    K = K3
    c = (K.t(-1),)
    assert K.enumerate_coset_reps(c, -1, 1) == list(K.iter_coset_reps(c, -1, 1))


def test_enumeration_budget():
    K = LocalField.make(3, budget=5)
    with pytest.raises(BudgetError):
        K.enumerate_coset_reps((K.zero(),), 0, 2)


def test_text_round_trip():
    x = K3.parse("t^-1*[2] + t^0*[1] + t^2*[1]")
    assert str(x) == "t^-1*[2] + t^0*[1] + t^2*[1]"
    assert x.ord() == -1 and x.ac() == 2


def test_bad_text_rejected():
    with pytest.raises(FieldInputError):
        K3.parse("t^^1")


@pytest.mark.parametrize("q", sorted(DEFAULT_MODULI))
def test_default_moduli_irreducible(q):
    p, f, mod = DEFAULT_MODULI[q]
    R = ResidueField(p, f, mod)
    assert R.q == q
    assert f == 1 or is_irreducible(mod, p)


def test_reducible_modulus_rejected():
    with pytest.raises(FieldInputError):
        ResidueField(3, 2, (1, 0, 2))  # x^2 - 1 = (x-1)(x+1)


def test_residue_field_q9_arithmetic():
    R = LocalField.make(9).residue
    for a in range(1, 9):
        assert R.mul(a, R.inv(a)) == 1
    assert sum(R.trace(a) for a in range(9)) % 3 == 0


# properties ----------------------------------------------------------------


@given(elements(), elements())
def test_ultrametric(x, y):
    s = x + y
    assert s.ord() >= min(x.ord(), y.ord())
    if x.ord() != y.ord():
        assert s.ord() == min(x.ord(), y.ord())


@given(elements(), elements())
def test_ord_ac_multiplicative(x, y):
    if x.is_zero() or y.is_zero():
        return
    xy = x * y
    assert xy.ord() == x.ord() + y.ord()
    assert xy.ac() == K3.residue.mul(x.ac(), y.ac())


@given(elements(), elements())
def test_character_additive(x, y):
    assert (x + y).character_exponent() == (x.character_exponent() + y.character_exponent()) % 3


@given(elements(), st.integers(-2, 1), st.integers(0, 2))
def test_reps_tile_ball(c, alpha, span):
    K = K3
    D = alpha + span
    center = (c.truncate(alpha),)
    reps = K.enumerate_coset_reps(center, alpha, D)
    assert len(reps) == 3**span
    assert all(in_ball(r, center, alpha) for r in reps)
    for i, a in enumerate(reps):
        for b in reps[i + 1 :]:
            assert not in_ball(vec_sub(a, b), K.zeros(1), D)
