"""Distributions as evaluators on twisted ball queries.

A distribution on K^m is determined by its values on the test functions
1_{B(c,alpha)} Psi(<., xi>). Every evaluator receives canonical queries
(center mod t^alpha, frequency mod t^(1-alpha)); the phase dropped by the
canonicalization is restored by ``Distribution.query``.
"""

from __future__ import annotations

import itertools
import random
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .coeff_ring import MotivicScalar
from .expr import PolyMap, taylor_remainder_poly
from .integrals import Constraint, Phase, ball_betas, ball_integral
from .local_field import (
    INF,
    FieldElement,
    FieldInputError,
    LocalField,
    PrecisionError,
    Vector,
    in_ball,
    inner_product,
    psi_exponent,
    vec_add,
    vec_neg,
    vec_ord,
    vec_sub,
)
from .schwartz import SBFunction, SBTerm, compose, fourier, integrate, multiply, reflect, twist


class DistributionError(RuntimeError):
    """An operation on distributions could not be carried out."""


class SmoothDataError(DistributionError):
    """Pull-back data bounds fail; ``witness`` describes where."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


class ReconstructionError(DistributionError):
    """Sampled values are not constant at the claimed depth."""


VANISHES = 10**9  # xi bound meaning the query is identically zero


def agree(a: MotivicScalar, b: MotivicScalar, q: int) -> bool:
    """Exact equality after L -> q; grid sums count cosets as integers."""
    return a.eval_at_q(q) == b.eval_at_q(q)


def _zero(K: LocalField) -> MotivicScalar:
    return MotivicScalar.zero(K.p)


def _one(K: LocalField) -> MotivicScalar:
    return MotivicScalar.one(K.p)


# ---------------------------------------------------------------------------
# Base class
# ---------------------------------------------------------------------------


class Distribution:
    kind = "custom"

    def __init__(self, K: LocalField, m: int, support: tuple[Vector, int] | None = None):
        self.K = K
        self.m = m
        self.support = support
        self._memo: dict = {}
        self._lock = threading.Lock()

    def query(self, c: Sequence[FieldElement], alpha: int, xi: Sequence[FieldElement] | None = None) -> MotivicScalar:
        """Value on 1_{B(c,alpha)} Psi(<., xi>)."""
        if len(c) != self.m or (xi is not None and len(xi) != self.m):
            raise FieldInputError(f"query dimension mismatch: distribution has m={self.m}")
        cc = tuple(x.truncate(alpha) for x in c)
        xi = tuple(xi) if xi is not None else self.K.zeros(self.m)
        keep = tuple(x.truncate(1 - alpha) for x in xi)
        dropped = vec_sub(xi, keep)
        key = (cc, alpha, keep)
        with self._lock:
            val = self._memo.get(key)
        if val is None:
            val = self._evaluate(cc, alpha, keep)
            with self._lock:
                self._memo[key] = val
        if any(d.coeffs for d in dropped):
            val = val.times_zeta(psi_exponent(cc, dropped))
        return val

    def _evaluate(self, c: Vector, alpha: int, xi: Vector) -> MotivicScalar:
        raise NotImplementedError

    def xi_bound(self, c: Vector, alpha: int) -> list[int | None]:
        """Per coordinate b_i: the query vanishes when ord xi_i < b_i for some i."""
        return [None] * self.m

    def pair(self, phi: SBFunction) -> MotivicScalar:
        """<u, phi> term by term through twisted queries."""
        total = _zero(self.K)
        for t in phi.terms:
            total = total + t.coeff * self.query(t.center, t.radius, t.freq)
        return total

    def describe(self) -> dict:
        return {"kind": self.kind, "m": self.m}

    def __repr__(self):
        return f"<{type(self).__name__} m={self.m}>"


class CustomDistribution(Distribution):
    kind = "custom"

    def __init__(self, K: LocalField, m: int, evaluator: Callable[[Vector, int, Vector], MotivicScalar], name: str = "custom"):
        super().__init__(K, m)
        self.evaluator = evaluator
        self.name = name

    def _evaluate(self, c, alpha, xi):
        return self.evaluator(c, alpha, xi)

    def describe(self):
        return {"kind": "custom", "m": self.m, "name": self.name}


class ZeroDistribution(Distribution):
    kind = "zero"

    def _evaluate(self, c, alpha, xi):
        return _zero(self.K)

    def xi_bound(self, c, alpha):
        return [VANISHES] * self.m


class ScaledDistribution(Distribution):
    def __init__(self, u: Distribution, s: MotivicScalar):
        super().__init__(u.K, u.m)
        self.u, self.s = u, s
        self.kind = u.kind

    def _evaluate(self, c, alpha, xi):
        return self.s * self.u.query(c, alpha, xi)

    def xi_bound(self, c, alpha):
        return self.u.xi_bound(c, alpha)

    def describe(self):
        return {"kind": "scaled", "scalar": str(self.s), "of": self.u.describe()}


class SumDistribution(Distribution):
    kind = "sum"

    def __init__(self, parts: Sequence[Distribution], K: LocalField | None = None, m: int | None = None):
        if not parts and (K is None or m is None):
            raise DistributionError("empty sum needs K and m")
        super().__init__(K or parts[0].K, m if m is not None else parts[0].m)
        self.parts = list(parts)

    def _evaluate(self, c, alpha, xi):
        total = _zero(self.K)
        for u in self.parts:
            total = total + u.query(c, alpha, xi)
        return total

    def xi_bound(self, c, alpha):
        out: list[int | None] = [VANISHES] * self.m
        for u in self.parts:
            for i, b in enumerate(u.xi_bound(c, alpha)):
                out[i] = None if (b is None or out[i] is None) else min(out[i], b)
        return out

    def describe(self):
        return {"kind": "sum", "parts": [u.describe() for u in self.parts]}


class ReflectedDistribution(Distribution):
    """<u_check, phi> = <u, phi(-.)>."""

    kind = "reflected"

    def __init__(self, u: Distribution):
        super().__init__(u.K, u.m)
        self.u = u

    def _evaluate(self, c, alpha, xi):
        return self.u.query(vec_neg(c), alpha, vec_neg(xi))

    def describe(self):
        return {"kind": "reflected", "of": self.u.describe()}


def scale(u: Distribution, s: MotivicScalar | int) -> Distribution:
    if isinstance(s, int):
        s = MotivicScalar.from_int(u.K.p, s)
    return ScaledDistribution(u, s)


def reflect_distribution(u: Distribution) -> Distribution:
    return ReflectedDistribution(u)


# ---------------------------------------------------------------------------
# Built-in kinds
# ---------------------------------------------------------------------------


class FunctionDistribution(Distribution):
    kind = "function"

    def __init__(self, phi: SBFunction):
        super().__init__(phi.K, phi.m)
        self.phi = phi

    def _evaluate(self, c, alpha, xi):
        return integrate(multiply(self.phi, SBFunction.indicator(self.K, c, alpha, xi)))

    def xi_bound(self, c, alpha):
        loc = multiply(self.phi, SBFunction.indicator(self.K, c, alpha))
        if loc.is_zero():
            return [VANISHES] * self.m
        return [1 - loc.alpha_plus] * self.m

    def describe(self):
        return {"kind": "function", "sb": self.phi.to_json()}


def from_sb(phi: SBFunction) -> Distribution:
    return FunctionDistribution(phi)


class DiracDistribution(Distribution):
    kind = "dirac"

    def __init__(self, K: LocalField, point: Sequence[FieldElement]):
        super().__init__(K, len(point), support=(tuple(point), 10**6))
        self.point = tuple(point)

    def _evaluate(self, c, alpha, xi):
        if not in_ball(self.point, c, alpha):
            return _zero(self.K)
        return MotivicScalar.zeta(self.K.p, psi_exponent(self.point, xi))

    def describe(self):
        return {"kind": "dirac", "point": [str(x) for x in self.point]}


def dirac(K: LocalField, point: Sequence[FieldElement]) -> Distribution:
    return DiracDistribution(K, point)


class GraphDistribution(Distribution):
    """<u, phi> = integral over K^{m_x} of phi(x, g(x)) dx."""

    kind = "graph"

    def __init__(self, g: PolyMap, method: str = "stationary"):
        super().__init__(g.K, g.n_in + g.n_out)
        self.g = g
        self.method = method

    def split(self, v: Vector) -> tuple[Vector, Vector]:
        return tuple(v[: self.g.n_in]), tuple(v[self.g.n_in :])

    def _evaluate(self, c, alpha, xi):
        cx, cy = self.split(c)
        xx, eta = self.split(xi)
        phase = Phase(xx, self.g, eta)
        return ball_integral(self.K, cx, alpha, phase, [Constraint(self.g, cy, alpha)], method=self.method)

    def describe(self):
        return {"kind": "graph", **self.g.to_json()}


def graph_distribution(g: PolyMap, method: str = "stationary") -> Distribution:
    return GraphDistribution(g, method)


# ---------------------------------------------------------------------------
# Average formula
# ---------------------------------------------------------------------------


def _maximal_balls(phi: SBFunction) -> list[tuple[Vector, int]]:
    balls = sorted({(t.center, t.radius) for t in phi.terms}, key=lambda b: b[1])
    kept: list[tuple[Vector, int]] = []
    for c, r in balls:
        if not any(r >= r0 and in_ball(c, c0, r0) for c0, r0 in kept):
            kept.append((c, r))
    return kept


def eval_on_sb(
    u: Distribution,
    phi: SBFunction,
    window: tuple[int, int] | None = None,
    prune: bool = True,
) -> MotivicScalar:
    """<u, phi> by the average formula: sum over z of phi(z) u(z, alpha+, 0).

    ``window`` = (lo, hi) with lo <= alpha_minus(phi), hi >= alpha_plus(phi).
    With ``prune`` the grid is restricted to the maximal term balls of phi.
    """
    K = u.K
    if phi.m != u.m:
        raise FieldInputError("test function and distribution dimensions differ")
    if phi.is_zero():
        return _zero(K)
    lo, hi = phi.alpha_minus, phi.alpha_plus
    if window is not None:
        if window[0] > lo or window[1] < hi:
            raise FieldInputError(f"window {window} does not contain [{lo}, {hi}]")
        lo, hi = window
    if prune:
        grids = [K.enumerate_coset_reps(c, r, max(r, hi)) for c, r in _maximal_balls(phi)]
        reps = itertools.chain.from_iterable(grids)
    else:
        reps = K.enumerate_coset_reps(K.zeros(u.m), lo, hi)
    zero = K.zeros(u.m)
    total = _zero(K)
    for z in reps:
        val = phi.evaluate(z)
        if not val.is_zero():
            total = total + val * u.query(z, hi, zero)
    return total


# ---------------------------------------------------------------------------
# Derived distributions
# ---------------------------------------------------------------------------


class FourierDistribution(Distribution):
    """<F u, phi> = <u, F phi>."""

    kind = "fourier-of"

    def __init__(self, u: Distribution):
        super().__init__(u.K, u.m)
        self.u = u

    def _evaluate(self, c, alpha, xi):
        return eval_on_sb(self.u, fourier(SBFunction.indicator(self.K, c, alpha, xi)))

    def describe(self):
        return {"kind": "fourier", "of": self.u.describe()}


def fourier_distribution(u: Distribution) -> Distribution:
    return FourierDistribution(u)


class ProductBySB(Distribution):
    kind = "product-by-sb"

    def __init__(self, phi: SBFunction, u: Distribution):
        if phi.m != u.m:
            raise FieldInputError("dimension mismatch in product by SB function")
        super().__init__(u.K, u.m)
        self.phi, self.u = phi, u

    def _evaluate(self, c, alpha, xi):
        return eval_on_sb(self.u, multiply(self.phi, SBFunction.indicator(self.K, c, alpha, xi)))

    def describe(self):
        return {"kind": "product_by_sb", "sb": self.phi.to_json(), "of": self.u.describe()}


def product_by_sb(phi: SBFunction, u: Distribution) -> Distribution:
    return ProductBySB(phi, u)


class TensorDistribution(Distribution):
    kind = "tensor"

    def __init__(self, u: Distribution, v: Distribution):
        super().__init__(u.K, u.m + v.m)
        self.u, self.v = u, v

    def _evaluate(self, c, alpha, xi):
        a = self.u.query(c[: self.u.m], alpha, xi[: self.u.m])
        if a.is_zero():
            return a
        return a * self.v.query(c[self.u.m :], alpha, xi[self.u.m :])

    def xi_bound(self, c, alpha):
        return self.u.xi_bound(c[: self.u.m], alpha) + self.v.xi_bound(c[self.u.m :], alpha)

    def describe(self):
        return {"kind": "tensor", "left": self.u.describe(), "right": self.v.describe()}


def fubini_battery(K: LocalField, mx: int, my: int, count: int = 12, seed: int = 0) -> list[SBFunction]:
    """Product-space test functions used for the tensor symmetry check."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        a = rng.randint(-1, 1)
        c = tuple(K.element({k: rng.randrange(K.q) for k in range(-1, a)}) for _ in range(mx + my))
        xi = tuple(K.element({k: rng.randrange(K.q) for k in range(-1 - a, 1 - a)}) if rng.random() < 0.5 else K.zero() for _ in range(mx + my))
        out.append(SBFunction.indicator(K, c, a, xi))
    return out


def _partial_pairing(first: Distribution, second: Distribution, phi: SBFunction, first_is_x: bool) -> MotivicScalar:
    """<first, z -> <second, phi(z, .)>> with the inner pairing done termwise."""
    K = first.K
    mx = first.m
    terms = []
    for t in phi.terms:
        if first_is_x:
            cz, xz, cw, xw = t.center[:mx], t.freq[:mx], t.center[mx:], t.freq[mx:]
        else:
            cw, xw, cz, xz = t.center[: second.m], t.freq[: second.m], t.center[second.m :], t.freq[second.m :]
        inner = second.query(cw, t.radius, xw)
        if not inner.is_zero():
            terms.append(SBTerm(t.coeff * inner, cz, t.radius, xz))
    outer = SBFunction.from_terms(K, mx, terms)
    if outer.is_zero():
        return _zero(K)
    return eval_on_sb(first, outer, window=(outer.alpha_minus - 1, outer.alpha_plus + 1))


def tensor(u: Distribution, v: Distribution, battery: Sequence[SBFunction] | None = None) -> Distribution:
    """u (x) v after checking the Fubini symmetry on a battery of test functions."""
    if u.K != v.K:
        raise FieldInputError("tensor of distributions over different fields")
    battery = battery if battery is not None else fubini_battery(u.K, u.m, v.m)
    for phi in battery:
        left = _partial_pairing(u, v, phi, True)
        right = _partial_pairing(v, u, phi, False)
        if not agree(left, right, u.K.q):
            raise DistributionError(f"Fubini symmetry fails on test function {phi}: {left} != {right}")
    return TensorDistribution(u, v)


# ---------------------------------------------------------------------------
# Pull-back via the localization formula
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothData:
    """Bounds for the pull-back; None means estimate.

    n, rcheck: shell cells of {0 <= ord xi <= n-1} taken modulo t^rcheck.
    R_x: queries with smaller radius are split into sub-balls of radius R_x.
    R_y: radius of the target ball 1_{B(f(c), R_y)} localizing u.
    xi_floor: ord below which the xi-integrand is declared zero.
    N_delta: upper bound of ord(df(x)^T xi~) over the ball and a cell.
    N_R: lower bound of the Taylor remainder valuations; capped at nr_cap.
    """

    n: int = 1
    rcheck: int | None = None
    R_x: int | None = None
    R_y: int | None = None
    xi_floor: int | None = None
    N_delta: int | None = None
    N_R: int | None = None
    nr_cap: int = 10**6
    ry_cap: int = 4
    verify: bool = True
    verify_samples: int = 3


def shell_cells(K: LocalField, m: int, n: int, rcheck: int) -> list[Vector]:
    """Representatives of {0 <= min ord xi <= n-1} modulo t^rcheck."""
    reps = K.enumerate_coset_reps(K.zeros(m), 0, rcheck)
    return [r for r in reps if any(x.coeffs and x.v < n for x in r)]


class PullbackDistribution(Distribution):
    kind = "pullback"

    def __init__(self, f: PolyMap, u: Distribution, data: SmoothData = SmoothData()):
        if f.n_out != u.m:
            raise FieldInputError(f"map lands in K^{f.n_out} but distribution lives on K^{u.m}")
        super().__init__(u.K, f.n_in)
        self.f, self.u, self.data = f, u, data
        self.rcheck = data.rcheck if data.rcheck is not None else data.n
        if self.rcheck < data.n:
            raise FieldInputError("rcheck must be at least n")
        self.cells = shell_cells(self.K, u.m, data.n, self.rcheck)
        self._remainders = [taylor_remainder_poly(p) for p in f.polys]
        self.last_stats: dict = {}

    # bounds -----------------------------------------------------------------

    def _target_radius(self, c: Vector, alpha: int) -> float:
        betas = ball_betas(c, alpha)
        return min(self.f.diff_floor(betas, alpha))

    def _cell_T_U(self, bound: list[int | None], cell: Vector) -> float | None:
        best = None
        for b, x in zip(bound, cell):
            if b is None or not x.coeffs:
                continue
            val = b - x.v
            best = val if best is None else max(best, val)
        return best

    def _n_grad(self, c: Vector, alpha: int, cell: Vector) -> float | None:
        """Max of ord(df(x)^T xi~) for x in B(c, alpha), xi~ in the cell, or None."""
        if self.data.N_delta is not None:
            return self.data.N_delta
        K = self.K
        xi_t = tuple(x.with_prec(self.rcheck) for x in cell)
        for D in range(alpha, alpha + 4):
            worst = -INF
            try:
                for x in K.enumerate_coset_reps(c, alpha, D):
                    J = self.f.jacobian_at(tuple(v.with_prec(D) for v in x))
                    comps = [inner_product([row[i] for row in J], xi_t) for i in range(self.f.n_in)]
                    worst = max(worst, min(s.ord() for s in comps))
            except PrecisionError:
                continue
            return None if worst == INF else worst
        return None

    def _n_r(self, c: Vector, alpha: int, a_plus: int) -> float:
        if self.data.N_R is not None:
            return self.data.N_R
        betas = ball_betas(c, alpha) + [a_plus + 1] * self.f.n_in
        best = INF
        for R in self._remainders:
            for row in R:
                for poly in row:
                    if not poly.is_zero():
                        best = min(best, poly.ord_floor(betas))
        return min(best, self.data.nr_cap)

    def _cell_T_J(self, c: Vector, alpha: int, xi_x: Vector, cell: Vector) -> float | None:
        n_grad = self._n_grad(c, alpha, cell)
        if n_grad is None:
            return None
        o = vec_ord(xi_x)
        a_plus = alpha if o == INF else max(alpha, 1 - int(o))
        n_r = self._n_r(c, alpha, a_plus)
        A = max(n_grad - n_r + 1, a_plus)
        return -A - n_grad

    def xi_window(self, c: Vector, alpha: int, xi_x: Vector) -> dict:
        """Truncation T, constancy depth D and target radius R_y for one query."""
        K = self.K
        floor = self._target_radius(c, alpha)
        if self.data.R_y is not None:
            R_y = self.data.R_y
        elif floor == INF:
            R_y = alpha + self.data.ry_cap
        else:
            R_y = int(min(floor, alpha + self.data.ry_cap))
        fc = self.f(c)
        betas = ball_betas(c, alpha)
        val_floor = min(self.f.value_floor(betas))
        D_J = 1 - val_floor if val_floor != INF else -INF
        D_U = 1 - min(min(y.ord() for y in fc), R_y)
        D = int(max(D_J, D_U))
        if self.data.xi_floor is not None:
            return {"T": self.data.xi_floor, "D": max(D, self.data.xi_floor), "R_y": R_y, "fc": fc, "source": "data"}
        center_y = tuple(y.truncate(R_y) for y in fc)
        bound = self.u.xi_bound(center_y, R_y)
        T = None
        for cell in self.cells:
            T_cell = self._cell_T_U(bound, cell)
            if T_cell is None:
                T_cell = self._cell_T_J(c, alpha, xi_x, cell)
            if T_cell is None:
                raise SmoothDataError(
                    "no vanishing bound on a covector cell: the conormal directions cancel",
                    {"query_center": [str(x) for x in c], "radius": alpha, "cell": [str(x) for x in cell]},
                )
            T = T_cell if T is None else min(T, T_cell)
        T = int(T)
        return {"T": T, "D": max(D, T), "R_y": R_y, "fc": fc, "source": "estimated"}

    # evaluation -------------------------------------------------------------

    def _J(self, c: Vector, alpha: int, xi_x: Vector, xi: Vector) -> MotivicScalar:
        phase = Phase(xi_x, self.f, vec_neg(xi))
        return ball_integral(self.K, c, alpha, phase)

    def _evaluate(self, c, alpha, xi_x):
        data = self.data
        if data.R_x is not None and alpha < data.R_x:
            total = _zero(self.K)
            for r in self.K.enumerate_coset_reps(c, alpha, data.R_x):
                total = total + self.query(r, data.R_x, xi_x)
            return total
        if data.R_y is not None and self._target_radius(c, alpha) < data.R_y:
            total = _zero(self.K)
            for r in self.K.enumerate_coset_reps(c, alpha, alpha + 1):
                total = total + self.query(r, alpha + 1, xi_x)
            return total
        win = self.xi_window(c, alpha, xi_x)
        T, D, R_y, fc = win["T"], win["D"], win["R_y"], win["fc"]
        if T >= VANISHES:
            return _zero(self.K)
        center_y = tuple(y.truncate(R_y) for y in fc)
        my = self.u.m
        K = self.K
        if data.verify:
            self._verify_window(c, alpha, xi_x, center_y, R_y, T)
        total = _zero(K)
        for xi in K.enumerate_coset_reps(K.zeros(my), T, D):
            U = self.u.query(center_y, R_y, xi)
            if U.is_zero():
                continue
            J = self._J(c, alpha, xi_x, xi)
            if not J.is_zero():
                total = total + U * J
        self.last_stats = {"T": T, "D": D, "R_y": R_y, "count": K.count_coset_reps(my, T, D)}
        # Heifetz sum gives L^{-m_y} u o f; rescale to the L^{-m_x} normalization.
        return total.times_L(-my * D + my - self.m)

    def _verify_window(self, c, alpha, xi_x, center_y, R_y, T):
        """Spot-check that U*J vanishes just below the truncation."""
        K = self.K
        for cell in self.cells[: self.data.verify_samples]:
            lam = K.t(T - 1)
            xi = tuple(lam * x for x in cell)
            U = self.u.query(center_y, R_y, xi)
            if U.is_zero():
                continue
            J = self._J(c, alpha, xi_x, xi)
            if not J.is_zero():
                raise SmoothDataError(
                    "integrand nonzero below the declared truncation",
                    {"query_center": [str(x) for x in c], "radius": alpha, "xi": [str(x) for x in xi], "value": str(U * J)},
                )

    def describe(self):
        return {"kind": "pullback", **self.f.to_json(), "of": self.u.describe()}


def pullback(f: PolyMap, u: Distribution, data: SmoothData = SmoothData()) -> Distribution:
    return PullbackDistribution(f, u, data)


def compose_polymap(psi: SBFunction, f: PolyMap, support: Sequence[tuple[Vector, int]]) -> SBFunction:
    """psi o f on a union of balls covering its support, at a certified constancy depth."""
    depth = None
    for center, radius in support:
        betas = ball_betas(center, radius)
        D = radius
        while min(f.diff_floor(betas, D)) < psi.alpha_plus:
            D += 1
            if D > radius + 200:
                raise DistributionError("no constancy depth for the composition")
        depth = D if depth is None else max(depth, D)
    return compose(psi, f, support, depth)


def diagonal_map(K: LocalField, m: int) -> PolyMap:
    names = [f"x{i + 1}" for i in range(m)]
    return PolyMap.parse(names + names, names, K)


def diagonal_product(u: Distribution, v: Distribution, data: SmoothData = SmoothData(), battery=None) -> Distribution:
    """u . v = pull-back of u (x) v along x -> (x, x)."""
    if u.m != v.m:
        raise FieldInputError("diagonal product needs equal dimensions")
    w = tensor(u, v, battery)
    return PullbackDistribution(diagonal_map(u.K, u.m), w, data)


# ---------------------------------------------------------------------------
# Paley-Wiener
# ---------------------------------------------------------------------------


@dataclass
class PWResult:
    reconstruction: SBFunction
    verdict: bool
    witness: dict | None = None
    checked: int = 0


def localized_transform(u: Distribution, phi: SBFunction, xi: Vector) -> MotivicScalar:
    """u_phi(xi) = <u, phi Psi(<., xi>)>."""
    return u.pair(twist(phi, xi))


def claimed_support_bound(u: Distribution, phi: SBFunction) -> int | None:
    """Largest b with u_phi vanishing off B_b, from the distribution's own bounds."""
    best = None
    for t in phi.terms:
        bs = u.xi_bound(t.center, t.radius)
        if any(b is None for b in bs):
            return None
        b = min(bs)
        if b >= VANISHES:
            continue
        o = vec_ord(t.freq)
        if o != INF:
            b = min(b, int(o))
        best = b if best is None else min(best, b)
    if best is None:  # u_phi vanishes; any bound will do
        return 1 - phi.alpha_minus
    return best


def pw_battery(phi: SBFunction, count: int = 30, seed: int = 0) -> list[SBFunction]:
    K, m = phi.K, phi.m
    rng = random.Random(seed)
    lo, hi = phi.alpha_minus, phi.alpha_plus
    out = []
    for _ in range(count):
        a = rng.randint(lo - 1, hi + 1)
        c = tuple(K.element({k: rng.randrange(K.q) for k in range(lo - 1, a)}) for _ in range(m))
        if rng.random() < 0.5:
            xi = tuple(K.element({k: rng.randrange(K.q) for k in range(-a - 1, 1 - a)}) for _ in range(m))
        else:
            xi = K.zeros(m)
        out.append(SBFunction.indicator(K, c, a, xi))
    return out


def paley_wiener_check(
    u: Distribution,
    phi: SBFunction,
    support_bound: int,
    depth: int | None = None,
    battery: Sequence[SBFunction] | None = None,
    shell_samples: int = 64,
) -> PWResult:
    """Rebuild u_phi on B_{support_bound} and test conj-F(u_phi) = L^{-m} phi u."""
    K, m = u.K, u.m
    if depth is None:
        depth = max(1 - phi.alpha_minus, support_bound)
    if depth < support_bound:
        raise FieldInputError("depth must be at least the support bound")
    zero = K.zeros(m)
    values = []
    for xi in K.enumerate_coset_reps(zero, support_bound, depth):
        val = localized_transform(u, phi, xi)
        probe = (xi[0] + K.t(depth),) + tuple(xi[1:])
        if not agree(localized_transform(u, phi, probe), val, K.q):
            raise ReconstructionError(f"u_phi not constant on the coset of {[str(x) for x in xi]} at depth {depth}")
        values.append((xi, val))
    rec = SBFunction.from_terms(K, m, [SBTerm(v, xi, depth, zero) for xi, v in values])
    # just outside the claimed support
    shell = 0
    for xi in K.enumerate_coset_reps(zero, support_bound - 1, depth):
        if all(x.truncate(support_bound).is_zero() for x in xi):
            continue
        val = localized_transform(u, phi, xi)
        if not val.is_zero():
            return PWResult(rec, False, {"xi": [str(x) for x in xi], "value": str(val)}, 0)
        shell += 1
        if shell >= shell_samples:
            break
    battery = battery if battery is not None else pw_battery(phi)
    conj = fourier(reflect(rec))
    for i, psi_fn in enumerate(battery):
        lhs = integrate(multiply(conj, psi_fn))
        rhs = u.pair(multiply(phi, psi_fn)).times_L(-m)
        if not agree(lhs, rhs, K.q):
            return PWResult(rec, False, {"test": psi_fn.to_json(), "lhs": str(lhs), "rhs": str(rhs)}, i)
    return PWResult(rec, True, None, len(battery))


# ---------------------------------------------------------------------------
# Parameter families
# ---------------------------------------------------------------------------


@dataclass
class ParamFamily:
    params: tuple
    members: dict

    def __post_init__(self):
        self.params = tuple(self.params)
        missing = [w for w in self.params if w not in self.members]
        if missing:
            raise FieldInputError(f"family has no member for parameters {missing}")

    def __getitem__(self, w) -> Distribution:
        return self.members[w]


def param_pullback(F: Mapping, fam: ParamFamily, domain: Sequence) -> ParamFamily:
    """Family over ``domain`` with member_w = fam[F(w)]."""
    return ParamFamily(tuple(domain), {w: fam[F[w]] for w in domain})


def param_pushforward(F: Mapping, fam: ParamFamily, codomain: Sequence) -> ParamFamily:
    """Family over ``codomain`` with member_w' = sum of fam[w] over F(w) = w'."""
    some = next(iter(fam.members.values()))
    out = {}
    for w2 in codomain:
        fiber = [fam[w] for w in fam.params if F[w] == w2]
        out[w2] = SumDistribution(fiber, some.K, some.m) if fiber else ZeroDistribution(some.K, some.m)
    return ParamFamily(tuple(codomain), out)


def families_agree(a: ParamFamily, b: ParamFamily, queries: Sequence[tuple[Vector, int, Vector]]) -> bool:
    if set(a.params) != set(b.params):
        return False
    some = next(iter(a.members.values()))
    return all(agree(a[w].query(*qr), b[w].query(*qr), some.K.q) for w in a.params for qr in queries)


# ---------------------------------------------------------------------------
# Invariant checks
# ---------------------------------------------------------------------------


def coset_additivity_holds(u: Distribution, c: Vector, alpha: int) -> bool:
    parent = u.query(c, alpha)
    total = _zero(u.K)
    for r in u.K.enumerate_coset_reps(c, alpha, alpha + 1):
        total = total + u.query(r, alpha + 1)
    return agree(parent, total, u.K.q)


def twisted_consistency_holds(u: Distribution, c: Vector, alpha: int, xi: Vector) -> bool:
    """For ord xi >= 1 - alpha: u(c, alpha, xi) = Psi(<c, xi>) u(c, alpha, 0)."""
    if vec_ord(xi) < 1 - alpha:
        raise FieldInputError("twisted consistency needs ord xi >= 1 - alpha")
    expected = u.query(c, alpha).times_zeta(psi_exponent(tuple(x.truncate(alpha) for x in c), xi))
    return agree(u.query(c, alpha, xi), expected, u.K.q)


# ---------------------------------------------------------------------------
# JSON descriptors
# ---------------------------------------------------------------------------


def from_descriptor(K: LocalField, desc: Mapping, data: SmoothData | None = None) -> Distribution:
    if not isinstance(desc, Mapping) or "kind" not in desc:
        raise FieldInputError("distribution descriptor must be an object with a 'kind'")
    kind = desc["kind"]
    if kind == "dirac":
        return dirac(K, K.parse_vector(desc["point"]))
    if kind in ("function", "from_sb"):
        return from_sb(SBFunction.from_json(K, desc["sb"], desc.get("m")))
    if kind == "graph":
        names = desc.get("vars") or ["x"]
        return graph_distribution(PolyMap.parse(desc["map"], names, K))
    if kind in ("fourier", "fourier-of"):
        return fourier_distribution(from_descriptor(K, desc["of"], data))
    if kind in ("product_by_sb", "product-by-sb"):
        inner = from_descriptor(K, desc["of"], data)
        return product_by_sb(SBFunction.from_json(K, desc["sb"], inner.m), inner)
    if kind == "tensor":
        return tensor(from_descriptor(K, desc["left"], data), from_descriptor(K, desc["right"], data))
    if kind == "pullback":
        names = desc.get("vars") or ["x"]
        inner = from_descriptor(K, desc["of"], data)
        return pullback(PolyMap.parse(desc["map"], names, K), inner, data or SmoothData())
    if kind == "product":
        return diagonal_product(from_descriptor(K, desc["left"], data), from_descriptor(K, desc["right"], data), data or SmoothData())
    if kind == "scaled":
        return scale(from_descriptor(K, desc["of"], data), MotivicScalar.parse(desc["scalar"], K.p))
    raise FieldInputError(f"unknown distribution kind {kind!r}")
