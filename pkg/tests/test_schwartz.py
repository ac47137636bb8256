from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from motivic_wf.coeff_ring import CyclotomicInteger, CyclotomicRational, MotivicScalar
from motivic_wf.local_field import FieldInputError, LocalField
from motivic_wf.oracle import brute_convolution, brute_fourier, brute_integral
from motivic_wf.sampling import SBShape, random_covector, random_point, random_sb
from motivic_wf.schwartz import (
    SBFunction,
    convolve,
    fourier,
    fourier_inverse,
    integrate,
    multiply,
    refine_to_depth,
    reflect,
    translate,
)

K = LocalField.make(3)
ONE = MotivicScalar.one(3)


def Lk(k: int) -> MotivicScalar:
    return ONE.times_L(k)


def ball(r: int, m: int = 1) -> SBFunction:
    return SBFunction.ball(K, m, r)


def ind(c, r, xi=None) -> SBFunction:
    return SBFunction.indicator(K, (c,), r, None if xi is None else (xi,))


@st.composite
def sb_functions(draw, m: int | None = None):
    seed = draw(st.integers(0, 10**6))
    dim = m if m is not None else draw(st.sampled_from([1, 2]))
    return random_sb(K, dim, random.Random(seed))


# evaluate ------------------------------------------------------------------


def test_evaluate_examples():
    assert ball(0).evaluate((K.t(1),)) == ONE
    assert ball(0).evaluate((K.t(-1),)).is_zero()
    assert ind(K.zero(), 0, K.one()).evaluate((K.one(),)) == MotivicScalar.zeta(3, 1)


# fourier -------------------------------------------------------------------


def test_fourier_examples():
    assert fourier(ball(0)) == ball(1)
    assert fourier(ball(2)) == ball(-1).times_L(-2)
    got = fourier(ind(K.zero(), 0, K.t(-1)))
    assert got == ind(-K.t(-1), 1)


def test_fourier_twisted_example_matches_brute_force():
    phi = ind(K.zero(), 0, K.t(-1))
    ys = [(K.t(-1, 2),), (K.t(-1, 2) + K.t(1),), (K.zero(),), (K.one(),)]
    F = fourier(phi)
    assert [F.evaluate(y).eval_at_q(3) for y in ys] == brute_fourier(phi, ys)


def test_fourier_inverse_examples():
    assert fourier_inverse(fourier(ball(0))) == ball(0)
    assert fourier(fourier(ball(0))) == ball(0).times_L(-1)


def test_multiply_examples():
    assert multiply(ball(0), ball(1)) == ball(1)
    assert multiply(ball(0), ind(K.t(-1), 0)).is_zero()
    xi = K.t(-1)
    assert multiply(ind(K.zero(), 0, xi), ind(K.zero(), 0, -xi)) == ball(0)


def test_integrate_examples():
    assert integrate(ball(1, m=2)) == Lk(-2)
    assert integrate(ind(K.zero(), 0, K.one())).is_zero()
    assert integrate(ind(K.t(-2), 1)) == Lk(-1)


def test_convolve_examples():
    assert convolve(ball(0), ball(0)) == ball(0)
    xs = [(K.zero(),), (K.one(),), (K.t(-1),)]
    got = [convolve(ball(0), ball(0)).evaluate(x).eval_at_q(3) for x in xs]
    assert got == brute_convolution(ball(0), ball(0), xs)


def test_bounds_examples():
    phi = ind(K.zero(), 0, K.t(-2))
    assert phi.constancy_bound() == 3
    assert ind(K.t(-3), 2).support_bound() == -3
    refined = refine_to_depth(ball(0), 1)
    assert len(refined.terms) == 3 and all(t.radius == 1 for t in refined.terms)
    assert refined.same_function(ball(0))


def test_refine_below_constancy_rejected():
    with pytest.raises(FieldInputError):
        refine_to_depth(ind(K.zero(), 0, K.t(-2)), 1)


def test_zero_function_conventions():
    z = SBFunction.zero(K, 1)
    assert z.is_zero() and integrate(z).is_zero()
    assert fourier(z).is_zero()


def test_canonical_frequency_folding():
    # the frequency t^0 is invisible on B_1 and must be dropped
    phi = SBFunction.indicator(K, (K.one(),), 1, (K.one(),))
    assert phi.terms[0].freq[0].is_zero()
    assert phi.terms[0].coeff == MotivicScalar.zeta(3, 1)


def test_json_round_trip():
    phi = random_sb(K, 2, random.Random(5))
    assert SBFunction.from_json(K, phi.to_json()) == phi
    assert SBFunction.from_text(K, phi.to_text()) == phi


# properties ----------------------------------------------------------------


@given(sb_functions())
def test_fourier_inversion(phi):
    assert fourier(fourier(phi)) == reflect(phi).times_L(-phi.m)
    assert fourier_inverse(fourier(phi)) == phi


@given(st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_convolution_theorem(seed, m):
    rng = random.Random(seed)
    phi, psi = random_sb(K, m, rng), random_sb(K, m, rng)
    assert fourier(convolve(phi, psi)) == multiply(fourier(phi), fourier(psi))
    assert convolve(phi, psi) == convolve(psi, phi)


@given(st.integers(0, 10**6))
def test_fourier_oracle(seed):
    rng = random.Random(seed)
    phi = random_sb(K, 1, rng)
    ys = [random_covector(K, 1, rng) for _ in range(8)]
    F = fourier(phi)
    assert [F.evaluate(y).eval_at_q(3) for y in ys] == brute_fourier(phi, ys)


@given(st.integers(0, 10**6))
def test_integral_oracle(seed):
    phi = random_sb(K, 1, random.Random(seed))
    assert integrate(phi).eval_at_q(3) == brute_integral(phi)


@given(st.integers(0, 10**6))
def test_normalization_soundness(seed):
    rng = random.Random(seed)
    phi = random_sb(K, 1, rng, SBShape(max_terms=3, radius=(-1, 1), freq_ord=(-1, 1)))
    fine = refine_to_depth(phi, phi.alpha_plus + 1)
    for _ in range(6):
        x = random_point(K, 1, rng)
        assert phi.evaluate(x) == fine.evaluate(x)
    # refinement trades one L-power for q^m children, so compare at L = q
    assert integrate(fine).eval_at_q(3) == integrate(phi).eval_at_q(3)


@given(sb_functions())
def test_support_condition(phi):
    assert multiply(phi, ball(phi.alpha_minus, phi.m)) == phi


@given(sb_functions(), st.integers(0, 3))
def test_convolution_with_small_ball(phi, extra):
    a = phi.alpha_plus + extra
    assert convolve(phi, ball(a, phi.m)).same_function(phi.times_L(-a * phi.m))


@given(sb_functions(m=1))
def test_translate_preserves_integral(phi):
    assert integrate(translate(phi, (K.t(-1),))) == integrate(phi)


@given(st.integers(-2, 3), st.sampled_from([1, 2]))
def test_volume_additivity(alpha, m):
    kids = refine_to_depth(ball(alpha, m), alpha + 1)
    assert len(kids.terms) == 3**m
    assert integrate(kids) == integrate(ball(alpha, m)).times_L(-m) * MotivicScalar.from_int(3, 3**m)
    total = sum((integrate(SBFunction.indicator(K, t.center, t.radius)).eval_at_q(3) for t in kids.terms),
                CyclotomicRational(CyclotomicInteger.zero(3)))
    assert total == integrate(ball(alpha, m)).eval_at_q(3)
