from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from motivic_wf.coeff_ring import (
    CoefficientError,
    CyclotomicInteger,
    CyclotomicRational,
    MotivicScalar,
    char_sum_over_residue_line,
)
from motivic_wf.local_field import DEFAULT_MODULI, ResidueField

P = 3


def L(k: int = 1, p: int = P) -> MotivicScalar:
    return MotivicScalar.one(p).times_L(k)


def geom(p: int = P, i: int = 1) -> MotivicScalar:
    """1 / (1 - L^-i)."""
    return MotivicScalar.geometric(p, i)


def rat(n: int, d: int = 1, p: int = P) -> CyclotomicRational:
    return CyclotomicRational(CyclotomicInteger.from_int(p, n), d)


@st.composite
def scalars(draw, p: int = P):
    num = {}
    for _ in range(draw(st.integers(0, 3))):
        k = draw(st.integers(-3, 3))
        coords = draw(st.lists(st.integers(-4, 4), min_size=p - 1, max_size=p - 1))
        num[k] = CyclotomicInteger(p, coords)
    den = draw(st.lists(st.integers(1, 3), max_size=2))
    return MotivicScalar(p, num, den)


# examples ------------------------------------------------------------------


def test_add_examples():
    assert (L(2) + (-L(2))).is_zero()
    assert geom() + MotivicScalar.zero(P) == geom()
    assert L(-1) + L(-1) == MotivicScalar.from_int(P, 2).times_L(-1)


def test_mul_examples():
    one_minus = MotivicScalar.one(P) - L(-1)
    assert one_minus * geom() == MotivicScalar.one(P)
    assert L(-5) * L(5) == MotivicScalar.one(P)
    z = MotivicScalar.zeta(P, 1)
    assert z * MotivicScalar.zeta(P, P - 1) == MotivicScalar.one(P)


@pytest.mark.parametrize("r,q,want", [(0, 3, 3), (1, 3, 0), (2, 5, 0)])
def test_char_sum_examples(r, q, want):
    p, f, mod = DEFAULT_MODULI[q]
    assert char_sum_over_residue_line(r, ResidueField(p, f, mod)) == MotivicScalar.from_int(p, want)


@pytest.mark.parametrize("q", sorted(DEFAULT_MODULI))
def test_char_sum_vanishes_off_zero(q):
    p, f, mod = DEFAULT_MODULI[q]
    R = ResidueField(p, f, mod)
    assert char_sum_over_residue_line(0, R) == MotivicScalar.from_int(p, q)
    for r in range(1, q):
        assert char_sum_over_residue_line(r, R).is_zero()


def test_eval_examples():
    assert L(-2).eval_at_q(3) == rat(1, 9)
    assert geom(P).eval_at_q(2) == rat(2)
    assert (L(1, 5) - MotivicScalar.one(5)).eval_at_q(5) == rat(4, 1, 5)


def test_zeta_power_sum_is_zero():
    for p in (2, 3, 5, 7):
        total = sum((CyclotomicInteger.zeta(p, k) for k in range(1, p)), CyclotomicInteger.zeta(p, 0))
        assert total.is_zero()
        assert len(total.coords) == p - 1


def test_zero_has_empty_denominator():
    z = MotivicScalar(P, {}, [1, 2])
    assert z.is_zero() and z.den == ()


def test_denominator_stripped_only_on_exact_division():
    s = (L(2) - MotivicScalar.one(P)) * MotivicScalar(P, {0: CyclotomicInteger.from_int(P, 1)}, [2])
    assert s == MotivicScalar.one(P) and s.den == ()
    kept = MotivicScalar(P, {0: CyclotomicInteger.from_int(P, 1)}, [2])
    assert kept.den == (2,)


def test_text_round_trip():
    text = "(2*z^1)*L^-3 / (L^2-1)"
    s = MotivicScalar.parse(text, 3)
    assert str(s) == text
    assert MotivicScalar.parse(str(s), 3) == s


def test_mismatched_p_rejected():
    with pytest.raises(CoefficientError):
        MotivicScalar.one(3) + MotivicScalar.one(5)


def test_bad_denominator_rejected():
    with pytest.raises(CoefficientError):
        MotivicScalar(P, {0: CyclotomicInteger.from_int(P, 1)}, [0])


# properties ----------------------------------------------------------------


@given(scalars(), scalars(), scalars())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a + b == b + a
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c


@given(scalars(), scalars(), st.sampled_from([2, 3, 4, 5]))
def test_eval_is_homomorphism(a, b, q):
    assert (a * b).eval_at_q(q) == a.eval_at_q(q) * b.eval_at_q(q)
    assert (a + b).eval_at_q(q) == a.eval_at_q(q) + b.eval_at_q(q)


@given(scalars())
def test_parse_round_trip(a):
    assert MotivicScalar.parse(str(a), P) == a
