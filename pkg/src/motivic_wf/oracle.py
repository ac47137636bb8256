"""Brute-force character sums used as independent oracles.

These routines never call the closed-form operations of the schwartz
module: membership and phases are read directly off coefficient lists,
and every integral becomes a finite sum over coset representatives with
weight q^(-m D), evaluated in Q(zeta_p).
"""

from __future__ import annotations

from typing import Callable, Sequence

from .coeff_ring import CyclotomicInteger, CyclotomicRational
from .local_field import FieldElement, LocalField, Vector, vec_ord
from .schwartz import SBFunction


def coeff_map(x: FieldElement) -> dict[int, int]:
    return {x.v + i: c for i, c in enumerate(x.coeffs) if c}


def t0_trace(x: Sequence[FieldElement], y: Sequence[FieldElement]) -> int:
    """tr of the t^0 coefficient of sum x_i y_i, computed from raw coefficients."""
    R = x[0].K.residue
    acc = 0
    for a, b in zip(x, y):
        bm = coeff_map(b)
        for k, c in coeff_map(a).items():
            d = bm.get(-k)
            if d:
                acc = R.add(acc, R.mul(c, d))
    return R.trace(acc)


def member(x: Sequence[FieldElement], c: Sequence[FieldElement], alpha: int) -> bool:
    for a, b in zip(x, c):
        am, bm = coeff_map(a), coeff_map(b)
        for k in set(am) | set(bm):
            if k < alpha and am.get(k, 0) != bm.get(k, 0):
                return False
    return True


def _zero_vec(K: LocalField, m: int) -> Vector:
    return tuple(K.zero() for _ in range(m))


def _weighted(p: int, counts: list[int], q: int, e: int) -> CyclotomicRational:
    """q^(-e) * sum_k counts[k] zeta^k, exact for either sign of e."""
    num = CyclotomicInteger.from_counts(p, counts)
    if e >= 0:
        return CyclotomicRational(num, q**e)
    return CyclotomicRational(num * q ** (-e))


def _finish(per_term: list[list[int]], weights: list[CyclotomicRational], p: int, q: int, e: int) -> CyclotomicRational:
    total = CyclotomicRational(CyclotomicInteger.zero(p))
    for counts, w in zip(per_term, weights):
        if any(counts):
            total = total + w * _weighted(p, counts, q, e)
    return total


class SampledFunction:
    """Values of an SB function on the coset grid of B_lo mod t^D, per term."""

    def __init__(self, phi: SBFunction, q: int, lo: int, D: int):
        K = phi.K
        self.phi, self.q, self.lo, self.D = phi, q, lo, D
        self.p = K.p
        self.reps = K.enumerate_coset_reps(_zero_vec(K, phi.m), lo, D)
        self.weights = [t.coeff.eval_at_q(q) for t in phi.terms]
        self.hits: list[list[tuple[int, int]]] = []
        for x in self.reps:
            row = []
            for i, t in enumerate(phi.terms):
                if member(x, t.center, t.radius):
                    row.append((i, t0_trace(x, t.freq)))
            self.hits.append(row)

    def twisted_sum(self, y: Sequence[FieldElement], sign: int = 1) -> CyclotomicRational:
        """q^(-mD) * sum over reps x of phi(x) Psi(sign * <x, y>)."""
        p = self.p
        per_term = [[0] * p for _ in self.weights]
        for x, row in zip(self.reps, self.hits):
            if not row:
                continue
            ey = sign * t0_trace(x, y)
            for i, e in row:
                per_term[i][(e + ey) % p] += 1
        return _finish(per_term, self.weights, p, self.q, self.phi.m * self.D)


def brute_fourier(phi: SBFunction, ys: Sequence[Vector], q: int | None = None) -> list[CyclotomicRational]:
    """Brute-force F(phi)(y) for each y, at depth max(alpha_plus, 1 - ord y)."""
    K = phi.K
    q = q or K.q
    if phi.is_zero():
        return [CyclotomicRational(CyclotomicInteger.zero(K.p)) for _ in ys]
    D = phi.alpha_plus
    for y in ys:
        o = vec_ord(y)
        if o != float("inf"):
            D = max(D, 1 - int(o))
    grid = SampledFunction(phi, q, phi.alpha_minus, D)
    return [grid.twisted_sum(y) for y in ys]


def brute_integral(phi: SBFunction, q: int | None = None) -> CyclotomicRational:
    K = phi.K
    if phi.is_zero():
        return CyclotomicRational(CyclotomicInteger.zero(K.p))
    return SampledFunction(phi, q or K.q, phi.alpha_minus, phi.alpha_plus).twisted_sum(_zero_vec(K, phi.m))


def brute_convolution(phi: SBFunction, psi: SBFunction, xs: Sequence[Vector], q: int | None = None) -> list[CyclotomicRational]:
    """(phi * psi)(x) = integral of phi(y) psi(x - y) dy, by a double enumeration."""
    K = phi.K
    q = q or K.q
    p = K.p
    if phi.is_zero() or psi.is_zero():
        return [CyclotomicRational(CyclotomicInteger.zero(p)) for _ in xs]
    D = max(phi.alpha_plus, psi.alpha_plus)
    reps = K.enumerate_coset_reps(_zero_vec(K, phi.m), phi.alpha_minus, D)
    wa = [t.coeff.eval_at_q(q) for t in phi.terms]
    wb = [t.coeff.eval_at_q(q) for t in psi.terms]
    out = []
    for x in xs:
        per = {}
        for y in reps:
            ha = [(i, t0_trace(y, t.freq)) for i, t in enumerate(phi.terms) if member(y, t.center, t.radius)]
            if not ha:
                continue
            z = tuple(a - b for a, b in zip(x, y))
            hb = [(j, t0_trace(z, t.freq)) for j, t in enumerate(psi.terms) if member(z, t.center, t.radius)]
            for i, e in ha:
                for j, f in hb:
                    per.setdefault((i, j), [0] * p)[(e + f) % p] += 1
        total = CyclotomicRational(CyclotomicInteger.zero(p))
        for (i, j), counts in per.items():
            total = total + wa[i] * wb[j] * _weighted(p, counts, q, phi.m * D)
        out.append(total)
    return out


def brute_ball_integral(
    K: LocalField,
    center: Vector,
    radius: int,
    depth: int,
    integrand: Callable[[Vector], tuple[bool, int]],
    q: int | None = None,
) -> CyclotomicRational:
    """q^(-m depth) * sum over reps x of B(center, radius) of [ok(x)] zeta^e(x).

    ``integrand`` returns (ok, exponent); the caller guarantees it is
    constant on cosets of B_depth.
    """
    q = q or K.q
    p = K.p
    counts = [0] * p
    for x in K.enumerate_coset_reps(center, radius, depth):
        ok, e = integrand(x)
        if ok:
            counts[e % p] += 1
    return _weighted(p, counts, q, len(center) * depth)
