"""Schwartz-Bruhat functions as finite sums of twisted ball indicators.

A term (a, c, alpha, xi) is the function x -> a * 1_{B(c,alpha)}(x) * Psi(<x, xi>).
Terms are kept canonical: the center is reduced mod t^alpha and the frequency
mod t^(1-alpha), the dropped phase being folded into the coefficient.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

from .coeff_ring import MotivicScalar
from .local_field import (
    INF,
    FieldElement,
    FieldInputError,
    LocalField,
    Vector,
    in_ball,
    psi_exponent,
    vec_add,
    vec_neg,
    vec_ord,
    vec_sub,
)


@dataclass(frozen=True, eq=False)
class SBTerm:
    coeff: MotivicScalar
    center: Vector
    radius: int
    freq: Vector

    @property
    def m(self) -> int:
        return len(self.center)

    @property
    def key(self) -> tuple:
        return (self.center, self.radius, self.freq)

    def sort_key(self) -> tuple:
        return (
            self.radius,
            tuple(c.sort_key() for c in self.center),
            tuple(x.sort_key() for x in self.freq),
        )

    def support_bound(self) -> int:
        return int(min(vec_ord(self.center), self.radius))

    def constancy_bound(self) -> int:
        o = vec_ord(self.freq)
        return self.radius if o == INF else int(max(self.radius, 1 - o))

    def __repr__(self):
        return (
            f"SBTerm({self.coeff}, c={[str(c) for c in self.center]}, "
            f"r={self.radius}, xi={[str(x) for x in self.freq]})"
        )


def canonical_term(coeff: MotivicScalar, center: Sequence[FieldElement], radius: int, freq: Sequence[FieldElement]) -> SBTerm:
    """Reduce center mod t^radius and frequency mod t^(1-radius), folding the phase."""
    c = tuple(x.truncate(radius) for x in center)
    keep = tuple(x.truncate(1 - radius) for x in freq)
    dropped = vec_sub(freq, keep)
    if any(d.coeffs for d in dropped):
        coeff = coeff.times_zeta(psi_exponent(c, dropped))
    return SBTerm(coeff, c, radius, keep)


class SBFunction:
    """Canonical finite sum of twisted ball indicators on K^m."""

    __slots__ = ("K", "m", "terms", "__dict__")

    def __init__(self, K: LocalField, m: int, terms: tuple[SBTerm, ...]):
        self.K = K
        self.m = m
        self.terms = terms

    # construction -----------------------------------------------------------

    @classmethod
    def from_terms(cls, K: LocalField, m: int, terms: Iterable[SBTerm | tuple]) -> SBFunction:
        merged: dict[tuple, SBTerm] = {}
        for t in terms:
            if not isinstance(t, SBTerm):
                t = SBTerm(*t)
            if len(t.center) != m or len(t.freq) != m:
                raise FieldInputError(f"term dimension mismatch: expected m={m}")
            if t.coeff.is_zero():
                continue
            t = canonical_term(t.coeff, t.center, t.radius, t.freq)
            prev = merged.get(t.key)
            if prev is not None:
                t = SBTerm(prev.coeff + t.coeff, t.center, t.radius, t.freq)
            merged[t.key] = t
        kept = [t for t in merged.values() if not t.coeff.is_zero()]
        kept.sort(key=SBTerm.sort_key)
        return cls(K, m, tuple(kept))

    @classmethod
    def zero(cls, K: LocalField, m: int) -> SBFunction:
        return cls(K, m, ())

    @classmethod
    def indicator(
        cls,
        K: LocalField,
        center: Sequence[FieldElement],
        radius: int,
        freq: Sequence[FieldElement] | None = None,
        coeff: MotivicScalar | int = 1,
    ) -> SBFunction:
        m = len(center)
        if isinstance(coeff, int):
            coeff = MotivicScalar.from_int(K.p, coeff)
        freq = tuple(freq) if freq is not None else K.zeros(m)
        return cls.from_terms(K, m, [SBTerm(coeff, tuple(center), radius, freq)])

    @classmethod
    def ball(cls, K: LocalField, m: int, radius: int) -> SBFunction:
        return cls.indicator(K, K.zeros(m), radius)

    # bounds -----------------------------------------------------------------

    @cached_property
    def alpha_minus(self) -> int:
        """Support bound: the function vanishes off B_{alpha_minus}."""
        if not self.terms:
            return 0
        return min(t.support_bound() for t in self.terms)

    @cached_property
    def alpha_plus(self) -> int:
        """Constancy bound: constant on cosets of B_{alpha_plus}."""
        if not self.terms:
            return 0
        return max(t.constancy_bound() for t in self.terms)

    def support_bound(self) -> int:
        return self.alpha_minus

    def constancy_bound(self) -> int:
        return self.alpha_plus

    def is_zero(self) -> bool:
        return not self.terms

    # evaluation -------------------------------------------------------------

    def evaluate(self, x: Sequence[FieldElement]) -> MotivicScalar:
        total = MotivicScalar.zero(self.K.p)
        for t in self.terms:
            if in_ball(x, t.center, t.radius):
                total = total + t.coeff.times_zeta(psi_exponent(x, t.freq))
        return total

    __call__ = evaluate

    # linear structure -------------------------------------------------------

    def _check(self, other: SBFunction) -> None:
        if other.m != self.m or other.K != self.K:
            raise FieldInputError("SB functions live on different spaces")

    def __add__(self, other: SBFunction) -> SBFunction:
        self._check(other)
        return SBFunction.from_terms(self.K, self.m, self.terms + other.terms)

    def __neg__(self) -> SBFunction:
        return SBFunction(self.K, self.m, tuple(SBTerm(-t.coeff, t.center, t.radius, t.freq) for t in self.terms))

    def __sub__(self, other: SBFunction) -> SBFunction:
        return self + (-other)

    def scale(self, s: MotivicScalar | int) -> SBFunction:
        if isinstance(s, int):
            s = MotivicScalar.from_int(self.K.p, s)
        if s.is_zero():
            return SBFunction.zero(self.K, self.m)
        return SBFunction(self.K, self.m, tuple(SBTerm(t.coeff * s, t.center, t.radius, t.freq) for t in self.terms))

    def times_L(self, k: int) -> SBFunction:
        return SBFunction(self.K, self.m, tuple(SBTerm(t.coeff.times_L(k), t.center, t.radius, t.freq) for t in self.terms))

    def map_terms(self, fn: Callable[[SBTerm], SBTerm | None]) -> SBFunction:
        out = [fn(t) for t in self.terms]
        return SBFunction.from_terms(self.K, self.m, [t for t in out if t is not None])

    # comparison -------------------------------------------------------------

    def __eq__(self, other):
        """Syntactic equality of canonical forms (coefficients compared exactly)."""
        if not isinstance(other, SBFunction):
            return NotImplemented
        if self.m != other.m or len(self.terms) != len(other.terms):
            return False
        return all(a.key == b.key and a.coeff == b.coeff for a, b in zip(self.terms, other.terms))

    __hash__ = None

    def same_function(self, other: SBFunction) -> bool:
        """Semantic equality: the difference vanishes identically."""
        self._check(other)
        return vanishes_identically(self - other)

    # text -------------------------------------------------------------------

    def __repr__(self):
        return f"SBFunction(m={self.m}, terms={list(self.terms)!r})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for t in self.terms:
            c = ",".join(str(x) for x in t.center)
            f = ",".join(str(x) for x in t.freq)
            parts.append(f"({t.coeff})*1[B({c};{t.radius})]*E({f})")
        return " + ".join(parts)

    def to_json(self) -> list[dict]:
        def vec(v: Vector):
            return str(v[0]) if self.m == 1 else [str(x) for x in v]

        return [
            {"coeff": str(t.coeff), "center": vec(t.center), "radius": t.radius, "freq": vec(t.freq)}
            for t in self.terms
        ]

    def to_text(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, K: LocalField, data, m: int | None = None) -> SBFunction:
        if isinstance(data, dict):
            m = data.get("m", m)
            data = data.get("terms", [])
        if not isinstance(data, list):
            raise FieldInputError("SB function JSON must be a list of terms")
        terms = []
        for entry in data:
            if not isinstance(entry, dict):
                raise FieldInputError("each SB term must be an object")
            try:
                center = K.parse_vector(entry["center"])
                radius = int(entry["radius"])
                raw_freq = entry.get("freq", entry.get("frequency"))
                coeff = MotivicScalar.parse(str(entry.get("coeff", "1")), K.p)
            except KeyError as exc:
                raise FieldInputError(f"SB term missing field {exc}") from exc
            freq = K.parse_vector(raw_freq) if raw_freq is not None else K.zeros(len(center))
            if m is None:
                m = len(center)
            if len(center) != m or len(freq) != m:
                raise FieldInputError("inconsistent term dimensions")
            terms.append(SBTerm(coeff, center, radius, freq))
        return cls.from_terms(K, m or 1, terms)

    @classmethod
    def from_text(cls, K: LocalField, text: str, m: int | None = None) -> SBFunction:
        return cls.from_json(K, json.loads(text), m)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def fourier(phi: SBFunction) -> SBFunction:
    """F(phi)(y) = integral of phi(x) Psi(<x,y>) dx, term by term in closed form."""
    m = phi.m
    out = []
    for t in phi.terms:
        coeff = t.coeff.times_zeta(psi_exponent(t.center, t.freq)).times_L(-m * t.radius)
        out.append(SBTerm(coeff, vec_neg(t.freq), 1 - t.radius, t.center))
    return SBFunction.from_terms(phi.K, m, out)


def reflect(phi: SBFunction) -> SBFunction:
    """x -> phi(-x)."""
    return phi.map_terms(lambda t: SBTerm(t.coeff, vec_neg(t.center), t.radius, vec_neg(t.freq)))


def fourier_inverse(phi: SBFunction) -> SBFunction:
    return fourier(reflect(phi)).times_L(phi.m)


def translate(phi: SBFunction, a: Sequence[FieldElement]) -> SBFunction:
    """x -> phi(x - a)."""
    a = tuple(a)
    return phi.map_terms(
        lambda t: SBTerm(t.coeff.times_zeta(-psi_exponent(a, t.freq)), vec_add(t.center, a), t.radius, t.freq)
    )


def twist(phi: SBFunction, xi: Sequence[FieldElement]) -> SBFunction:
    """x -> phi(x) Psi(<x, xi>)."""
    xi = tuple(xi)
    return phi.map_terms(lambda t: SBTerm(t.coeff, t.center, t.radius, vec_add(t.freq, xi)))


def multiply(phi: SBFunction, psi: SBFunction) -> SBFunction:
    phi._check(psi)
    out = []
    for a in phi.terms:
        for b in psi.terms:
            small, big = (a, b) if a.radius >= b.radius else (b, a)
            if in_ball(small.center, big.center, big.radius):
                out.append(SBTerm(a.coeff * b.coeff, small.center, small.radius, vec_add(a.freq, b.freq)))
    return SBFunction.from_terms(phi.K, phi.m, out)


def integrate(phi: SBFunction) -> MotivicScalar:
    total = MotivicScalar.zero(phi.K.p)
    for t in phi.terms:
        if vec_ord(t.freq) >= 1 - t.radius:
            total = total + t.coeff.times_zeta(psi_exponent(t.center, t.freq)).times_L(-phi.m * t.radius)
    return total


def convolve(phi: SBFunction, psi: SBFunction) -> SBFunction:
    return fourier_inverse(multiply(fourier(phi), fourier(psi)))


def _classes_vanish(center: Vector, radius: int, terms: Sequence[SBTerm]) -> bool:
    """Sum of terms restricted to B(center, radius), all containing it, is zero.

    Characters Psi(<x, xi>) on a ball of radius r coincide up to a constant
    exactly when the xi agree modulo t^(1-r), and distinct classes are
    linearly independent; so each class must have zero total coefficient.
    """
    classes: dict[tuple, MotivicScalar] = {}
    for t in terms:
        key = tuple(x.truncate(1 - radius) for x in t.freq)
        delta = tuple(a - b for a, b in zip(t.freq, key))
        val = t.coeff.times_zeta(psi_exponent(center, delta))
        classes[key] = classes[key] + val if key in classes else val
    return all(v.is_zero() for v in classes.values())


def _vanishes_on(K: LocalField, center: Vector, radius: int, outer: list[SBTerm], inner: list[SBTerm]) -> bool:
    """outer: terms containing the ball; inner: terms strictly inside it."""
    if not inner:
        return _classes_vanish(center, radius, outer)
    child_radius = radius + 1
    groups: dict[tuple, list[SBTerm]] = {}
    for t in inner:
        groups.setdefault(tuple(x.truncate(child_radius) for x in t.center), []).append(t)
    for key, ts in groups.items():
        here = outer + [t for t in ts if t.radius == child_radius]
        deeper = [t for t in ts if t.radius > child_radius]
        if not _vanishes_on(K, key, child_radius, here, deeper):
            return False
    if len(groups) == K.q ** len(center) or _classes_vanish(center, radius, outer):
        return True
    for child in K.iter_coset_reps(center, radius, child_radius):
        if child not in groups and not _classes_vanish(child, child_radius, outer):
            return False
    return True


def vanishes_identically(phi: SBFunction) -> bool:
    """Exact test that an SB function is the zero function."""
    K = phi.K
    balls = sorted({(t.center, t.radius) for t in phi.terms}, key=lambda b: b[1])
    tops: list[tuple[Vector, int]] = []
    for c, r in balls:
        if not any(in_ball(c, c0, r0) for c0, r0 in tops):
            tops.append((c, r))
    for c, r in tops:
        outer = [t for t in phi.terms if t.radius == r and t.center == c]
        inner = [t for t in phi.terms if t.radius > r and in_ball(t.center, c, r)]
        if not _vanishes_on(K, c, r, outer, inner):
            return False
    return True


def refine_to_depth(phi: SBFunction, D: int) -> SBFunction:
    """Rewrite phi on disjoint cosets of B_D (requires D >= alpha_plus)."""
    if phi.terms and D < phi.alpha_plus:
        raise FieldInputError(f"refinement depth {D} below the constancy bound {phi.alpha_plus}")
    out = []
    for t in phi.terms:
        for r in phi.K.enumerate_coset_reps(t.center, t.radius, D):
            out.append(SBTerm(t.coeff, r, D, t.freq))
    return SBFunction.from_terms(phi.K, phi.m, out)


def tensor_functions(phi: SBFunction, psi: SBFunction) -> SBFunction:
    """(x, y) -> phi(x) psi(y), split to a common radius per term pair."""
    if phi.K != psi.K:
        raise FieldInputError("tensor of functions over different fields")
    K = phi.K
    out = []
    for a in phi.terms:
        for b in psi.terms:
            r = max(a.radius, b.radius)
            xs = K.enumerate_coset_reps(a.center, a.radius, r)
            ys = K.enumerate_coset_reps(b.center, b.radius, r)
            for x in xs:
                for y in ys:
                    out.append(SBTerm(a.coeff * b.coeff, x + y, r, a.freq + b.freq))
    return SBFunction.from_terms(K, phi.m + psi.m, out)


def from_values(K: LocalField, m: int, values: Iterable[tuple[Vector, MotivicScalar]], depth: int) -> SBFunction:
    """Sum of value * 1_{B(x, depth)} over (x, value) pairs."""
    return SBFunction.from_terms(K, m, [SBTerm(v, tuple(x), depth, K.zeros(m)) for x, v in values])


def compose(psi: SBFunction, f, support: Sequence[tuple[Vector, int]], depth: int | None = None) -> SBFunction:
    """psi o f restricted to a union of balls, as an SB function.

    ``f`` maps a point of K^{m_x} to a point of K^{m_y}; ``support`` is a list
    of (center, radius) balls covering the support of psi o f; ``depth`` must
    make psi(f(x)) constant on cosets of B_depth inside those balls.
    """
    if depth is None:
        raise FieldInputError("compose needs an explicit constancy depth")
    K = psi.K
    out = []
    seen = set()
    for center, radius in support:
        for x in K.enumerate_coset_reps(center, radius, depth):
            if x in seen:
                continue
            seen.add(x)
            val = psi.evaluate(f(x))
            if not val.is_zero():
                out.append(SBTerm(val, x, depth, K.zeros(len(x))))
    return SBFunction.from_terms(K, len(support[0][0]) if support else 1, out)
