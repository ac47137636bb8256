"""Exact integrals of Psi(P(x)) over balls, for polynomial phases P.

Two reductions are provided.

``direct``: pick D so that P and all membership constraints are constant
on cosets of B_D; the integral is q^{-mD} times a character sum over the
coset representatives.

``stationary``: pick D so that only the part of P(z+h) of degree >= 2 in h
is forced into the maximal ideal. On z + B_D the phase is then
Psi(P(z)) Psi(<grad P(z), h>), whose integral over B_D is
q^{-mD} [ord d_iP(z) >= 1 - D for all i]. This is exact and needs far
fewer cosets when P oscillates fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .coeff_ring import CyclotomicInteger, MotivicScalar
from .expr import PolyMap, Polynomial
from .local_field import INF, FieldElement, LocalField, Vector, inner_product, vec_ord

MAX_DEPTH_STEPS = 200


@dataclass
class Constraint:
    """Membership G(x) in B(center, radius)."""

    G: PolyMap
    center: Vector
    radius: int

    def holds(self, x: Vector) -> bool:
        vals = self.G(x)
        for v, c in zip(vals, self.center):
            d = v - c
            if d.coeffs and d.v < self.radius:
                return False
        return True


@dataclass
class Phase:
    """P(x) = <x, xi> + sum_j eta_j * G_j(x) (eta may be empty)."""

    xi: Vector
    G: PolyMap | None = None
    eta: Vector = ()

    def value(self, x: Vector) -> FieldElement:
        v = inner_product(x, self.xi)
        if self.G is not None and self.eta:
            v = v + inner_product(self.G(x), self.eta)
        return v

    def gradient(self, x: Vector) -> list[FieldElement]:
        g = list(self.xi)
        if self.G is not None and self.eta:
            J = self.G.jacobian_at(x)
            for j, e in enumerate(self.eta):
                if not e.coeffs:
                    continue
                for i in range(len(g)):
                    g[i] = g[i] + e * J[j][i]
        return g

    def _weighted(self, floors: list[float]) -> float:
        best = INF
        for e, f in zip(self.eta, floors):
            if e.coeffs and f != INF:
                best = min(best, e.ord() + f)
        return best

    def quad_floor(self, betas: Sequence[float], D: int) -> float:
        if self.G is None or not self.eta:
            return INF
        return self._weighted(self.G.quad_floor(betas, D))

    def diff_floor(self, betas: Sequence[float], D: int) -> float:
        lin = min((x.ord() + D for x in self.xi if x.coeffs), default=INF)
        if self.G is None or not self.eta:
            return lin
        return min(lin, self._weighted(self.G.diff_floor(betas, D)))


def ball_betas(center: Vector, radius: int) -> list[float]:
    """ord z_i >= beta_i for z in B(center, radius)."""
    return [min(c.ord(), radius) for c in center]


def choose_depth(phase: Phase, center: Vector, radius: int, constraints: Sequence[Constraint], method: str) -> int:
    betas = ball_betas(center, radius)
    D = radius
    for _ in range(MAX_DEPTH_STEPS):
        ok = all(min(c.G.diff_floor(betas, D)) >= c.radius for c in constraints)
        if ok:
            f = phase.quad_floor(betas, D) if method == "stationary" else phase.diff_floor(betas, D)
            if f >= 1:
                return D
        D += 1
    raise RuntimeError("no constancy depth found")


def coset_sum(
    K: LocalField,
    center: Vector,
    radius: int,
    D: int,
    phase: Phase,
    constraints: Sequence[Constraint] = (),
    stationary: bool = True,
) -> MotivicScalar:
    p = K.p
    m = len(center)
    trace = K.residue._trace
    counts = [0] * p
    for z in K.enumerate_coset_reps(center, radius, D):
        if constraints and not all(c.holds(z) for c in constraints):
            continue
        if stationary:
            grad = phase.gradient(z)
            if any(g.coeffs and g.v < 1 - D for g in grad):
                continue
        counts[trace[phase.value(z).coeff(0)]] += 1
    if not any(counts):
        return MotivicScalar.zero(p)
    return MotivicScalar.from_cyclotomic(CyclotomicInteger.from_counts(p, counts), -m * D)


def ball_integral(
    K: LocalField,
    center: Vector,
    radius: int,
    phase: Phase,
    constraints: Sequence[Constraint] = (),
    method: str = "stationary",
    extra_depth: int = 0,
) -> MotivicScalar:
    """Integral over B(center, radius) of [constraints] Psi(phase(x)) dx."""
    center = tuple(c.truncate(radius) for c in center)
    D = choose_depth(phase, center, radius, constraints, method) + extra_depth
    return coset_sum(K, center, radius, D, phase, constraints, stationary=(method == "stationary"))
