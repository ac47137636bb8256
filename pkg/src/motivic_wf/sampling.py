"""Seeded random generators for scalars, field elements and SB functions."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .coeff_ring import CyclotomicInteger, MotivicScalar
from .local_field import FieldElement, LocalField, Vector
from .schwartz import SBFunction, SBTerm


@dataclass(frozen=True)
class SBShape:
    """Ranges used when drawing random SB functions."""

    max_terms: int = 4
    radius: tuple[int, int] = (-2, 2)
    freq_ord: tuple[int, int] = (-2, 2)
    center_low: int = -2
    zero_freq_prob: float = 0.3
    denominators: bool = True


def random_scalar(p: int, rng: random.Random, denominators: bool = True) -> MotivicScalar:
    coords = [rng.randint(-3, 3) for _ in range(p - 1)]
    if not any(coords):
        coords[0] = 1
    s = MotivicScalar.from_cyclotomic(CyclotomicInteger(p, coords), rng.randint(-2, 2))
    if denominators and rng.random() < 0.25:
        s = s * MotivicScalar.geometric(p, rng.randint(1, 2))
    return s


def random_element(K: LocalField, rng: random.Random, lo: int, hi: int, lead: bool = False) -> FieldElement:
    """Random element with exponents in [lo, hi); nonzero leading term at lo if ``lead``."""
    if hi <= lo:
        return K.zero()
    terms = {k: rng.randrange(K.q) for k in range(lo, hi)}
    if lead:
        terms[lo] = rng.randrange(1, K.q)
    return K.element(terms)


def random_vector(K: LocalField, m: int, rng: random.Random, lo: int, hi: int) -> Vector:
    return tuple(random_element(K, rng, lo, hi) for _ in range(m))


def random_frequency(K: LocalField, m: int, rng: random.Random, shape: SBShape, radius: int) -> Vector:
    if rng.random() < shape.zero_freq_prob:
        return K.zeros(m)
    o = rng.randint(*shape.freq_ord)
    hi = max(o + 1, 2 - radius)
    lead_at = rng.randrange(m)
    return tuple(
        random_element(K, rng, o, hi, lead=(i == lead_at)) if i == lead_at or rng.random() < 0.5 else K.zero()
        for i in range(m)
    )


def random_sb(K: LocalField, m: int, rng: random.Random, shape: SBShape = SBShape()) -> SBFunction:
    """A nonzero random SB function with at most ``shape.max_terms`` terms."""
    while True:
        terms = []
        for _ in range(rng.randint(1, shape.max_terms)):
            r = rng.randint(*shape.radius)
            center = random_vector(K, m, rng, shape.center_low, r)
            freq = random_frequency(K, m, rng, shape, r)
            terms.append(SBTerm(random_scalar(K.p, rng, shape.denominators), center, r, freq))
        phi = SBFunction.from_terms(K, m, terms)
        if not phi.is_zero():
            return phi


def random_point(K: LocalField, m: int, rng: random.Random, lo: int = -2, hi: int = 3) -> Vector:
    return random_vector(K, m, rng, lo, hi)


def random_covector(K: LocalField, m: int, rng: random.Random, lo: int = -2, hi: int = 3) -> Vector:
    """Random covector with order in [lo, hi) (zero allowed with small probability)."""
    if rng.random() < 0.1:
        return K.zeros(m)
    o = rng.randint(lo, hi - 1)
    lead_at = rng.randrange(m)
    return tuple(random_element(K, rng, o, hi, lead=(i == lead_at)) for i in range(m))
