"""Cone groups, the oscillatory-integral bound, wave front and singular support tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .coeff_ring import MotivicScalar
from .distribution import (
    Distribution,
    FunctionDistribution,
    GraphDistribution,
    ScaledDistribution,
    _maximal_balls,
    paley_wiener_check,
    shell_cells,
)
from .expr import Box, PolyMap, assignments, evaluate, parse, taylor_remainder_poly, to_polynomial, to_text
from .integrals import Phase, ball_betas, ball_integral
from .local_field import INF, FieldElement, FieldInputError, LocalField, PrecisionError, Vector, format_vector, in_ball, vec_ord
from .schwartz import SBFunction

DEFAULT_NR_CAP = 10**6


class PhaseDataError(RuntimeError):
    """The gradient of the phase vanishes somewhere on the support."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


# ---------------------------------------------------------------------------
# Lambda_n
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LambdaGroup:
    """Lambda_n = {x : n | ord x and ac x = 1}."""

    n: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise FieldInputError("Lambda_n needs n >= 1")

    @property
    def predicate(self):
        return parse(f"{self.n} | ord(x) and ac(x) = 1")

    def contains(self, x: FieldElement) -> bool:
        if x.is_zero():
            return False
        return bool(evaluate(self.predicate, {"x": x}, x.K))


def iter_lambda_reps(K: LocalField, group: LambdaGroup, k: int, depth: int) -> Iterator[FieldElement]:
    """t^(kn) (1 + mu), mu over representatives of tO modulo t^(depth - kn)."""
    base = k * group.n
    if depth < base + 1:
        raise FieldInputError(f"need depth >= {base + 1} for k={k}, n={group.n}")
    one = K.one()
    for (mu,) in K.iter_coset_reps((K.zero(),), 1, depth - base):
        yield (one + mu).shift(base)


def lambda_reps(K: LocalField, group: LambdaGroup, k: int, depth: int) -> list[FieldElement]:
    K.check_count(K.q ** max(depth - k * group.n - 1, 0))
    return list(iter_lambda_reps(K, group, k, depth))


# ---------------------------------------------------------------------------
# Phase data and the oscillatory bound
# ---------------------------------------------------------------------------


@dataclass
class PhaseData:
    """Bounds for a polynomial phase g(x, p) over the support balls of phi.

    N_grad: max of ord grad_x g over the balls (and parameter boxes).
    N_R: lower bound of the Taylor remainder valuations (capped if R = 0).
    """

    g: str
    names: tuple[str, ...]
    param_names: tuple[str, ...]
    N_grad: int
    N_R: int
    remainder: list[list[str]]
    balls: list[tuple[Vector, int]]
    nr_capped: bool
    depth: int

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "vars": list(self.names),
            "params": list(self.param_names),
            "N_grad": self.N_grad,
            "N_R": self.N_R,
            "N_R_capped": self.nr_capped,
            "R": self.remainder,
        }


def grad_order_range(grads, boxes: Sequence[Box], depth: int, K: LocalField, names: Sequence[str]):
    """Values of min_i ord(grads_i) over the cosets of the boxes at ``depth``.

    Returns (values, zero_locus); a coset lands in the zero locus when the
    minimum is not determined by the truncated point.
    """
    values, locus = set(), []
    for env in assignments(K, boxes, depth):
        point = [env[n] for n in names]
        known, lows = [], []
        for d in grads:
            val = d.evaluate(point)
            try:
                known.append(val.ord())
            except PrecisionError:
                lows.append(val.prec)
        best = min(known, default=INF)
        if best == INF or (lows and min(lows) < best):
            locus.append(env)
        else:
            values.add(int(best))
    return values, locus


def build_phase_data(
    K: LocalField,
    g: str,
    names: Sequence[str],
    phi: SBFunction,
    params: Mapping[str, FieldElement] | None = None,
    param_boxes: Sequence[Box] = (),
    nr_cap: int = DEFAULT_NR_CAP,
    extra_depth: int = 3,
) -> PhaseData:
    """Compute N_grad by range enumeration and N_R by monomial floors."""
    names = tuple(names)
    m = len(names)
    pnames = tuple(n for b in param_boxes for n in b.names)
    P = to_polynomial(parse(g), list(names) + list(pnames), K, params)
    grads = [P.derivative(i) for i in range(m)]
    all_vars = list(names) + list(pnames)
    balls = _maximal_balls(phi)
    if not balls:
        raise FieldInputError("phase data needs a nonzero test function")
    N_grad = -INF
    used_depth = 0
    for c, r in balls:
        found = None
        last_locus = None
        for D in range(r, r + extra_depth + 1):
            values, locus = grad_order_range(grads, [Box(names, c, r)] + list(param_boxes), D, K, all_vars)
            if locus:
                last_locus = locus[0]
                continue
            found = max(values)
            used_depth = max(used_depth, D)
            break
        if found is None:
            witness = {k: str(v) for k, v in (last_locus or {}).items()}
            raise PhaseDataError("gradient of the phase vanishes on the support", {"ball": [format_vector(c), r], "point": witness})
        N_grad = max(N_grad, found)
    R = taylor_remainder_poly(P)
    a_plus = phi.alpha_plus
    np_ = len(pnames)
    pbetas = [b for box in param_boxes for b in ball_betas(box.center, box.radius)]
    N_R = INF
    for c, r in balls:
        betas = ball_betas(c, r) + pbetas + [a_plus] * m + [INF] * np_
        for i in range(m):
            for j in range(i, m):
                if not R[i][j].is_zero():
                    N_R = min(N_R, R[i][j].ord_floor(betas))
    capped = N_R == INF or N_R > nr_cap
    N_R = nr_cap if capped else int(N_R)
    all_names = list(names) + list(pnames) + [f"{v}_y" for v in list(names) + list(pnames)]
    rem_text = [[to_text(R[i][j].to_ast(all_names)) for j in range(m)] for i in range(m)]
    return PhaseData(g, names, pnames, int(N_grad), N_R, rem_text, balls, capped, used_depth)


def oscillatory_bound(pd: PhaseData, phi: SBFunction) -> int:
    """Threshold -A - N_grad with A = max(N_grad - N_R + 1, alpha_plus(phi))."""
    for c, r in _maximal_balls(phi):
        if not any(r >= r0 and in_ball(c, c0, r0) for c0, r0 in pd.balls):
            raise PhaseDataError("test function support is not covered by the phase data", {"ball": [format_vector(c), r]})
    A = max(pd.N_grad - pd.N_R + 1, phi.alpha_plus)
    return -A - pd.N_grad


def oscillatory_integral(
    phi: SBFunction,
    pd: PhaseData,
    lam: FieldElement,
    v: Mapping[str, FieldElement] | None = None,
    group: LambdaGroup | None = None,
) -> MotivicScalar:
    """Integral of phi(x) Psi(lam g(x, v)) dx, exact."""
    K = phi.K
    if group is not None and not group.contains(lam):
        raise FieldInputError(f"lambda = {lam} is not in Lambda_{group.n}")
    G = PolyMap([to_polynomial(parse(pd.g), list(pd.names), K, v)], list(pd.names))
    total = MotivicScalar.zero(K.p)
    for t in phi.terms:
        val = ball_integral(K, t.center, t.radius, Phase(t.freq, G, (lam,)))
        if not val.is_zero():
            total = total + t.coeff * val
    return total


# ---------------------------------------------------------------------------
# Wave front test
# ---------------------------------------------------------------------------


SMOOTH_CERTIFIED = "smooth-certified"
SMOOTH_OBSERVED = "smooth-observed"
NOT_SMOOTH = "not-smooth"


@dataclass
class WFCertificate:
    point: Vector
    covector: Vector
    r: int
    rcheck: int
    n: int
    K: int
    verdict: str
    threshold: int | None
    witness: dict | None = None
    theorem_basis: str | None = None
    levels: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "point": [str(x) for x in self.point],
            "covector": [str(x) for x in self.covector],
            "r": self.r,
            "rcheck": self.rcheck,
            "n": self.n,
            "K": self.K,
            "verdict": self.verdict,
            "threshold": self.threshold,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        if self.theorem_basis is not None:
            out["theorem_basis"] = self.theorem_basis
        return out


def _check_covector(xi0: Vector, n: int, rcheck: int) -> int:
    o = vec_ord(xi0)
    if o == INF:
        raise FieldInputError("the covector must be nonzero")
    if not 0 <= o <= n - 1:
        raise FieldInputError(f"need 0 <= ord xi0 <= n-1, got ord {o} with n = {n}")
    if rcheck < n:
        raise FieldInputError("need rcheck >= n")
    return int(o)


def _unwrap(u: Distribution) -> Distribution:
    while isinstance(u, ScaledDistribution):
        u = u.u
    return u


def certify_threshold(u: Distribution, x0: Vector, xi0: Vector, r: int, rcheck: int) -> tuple[int, str] | None:
    """Threshold N from a closed form or the oscillatory bound, if one applies."""
    base = _unwrap(u)
    if isinstance(base, FunctionDistribution):
        loc = base.phi
        if loc.is_zero():
            return 1, "zero function"
        N = 1 - max(loc.alpha_plus, r) - int(vec_ord(xi0))
        return N, "Schwartz-Bruhat closed form: 1 - max(alpha_plus, r) - ord xi0"
    if isinstance(base, GraphDistribution):
        return _graph_threshold(base, x0, xi0, r, rcheck)
    return None


def _graph_threshold(u: GraphDistribution, x0: Vector, xi0: Vector, r: int, rcheck: int) -> tuple[int, str] | None:
    K = u.K
    g = u.g
    mx, my = g.n_in, g.n_out
    cx, cy = u.split(tuple(x.truncate(r) for x in x0))
    betas = ball_betas(cx, r)
    spread = min(g.diff_floor(betas, r))
    offset = min((a - b).ord() for a, b in zip(g(cx), cy))
    if offset >= r and spread >= r:
        pass  # the graph constraint holds on the whole ball
    elif offset < r and spread > offset:
        return 1, "empty localization"
    else:
        return None
    xnames = list(g.names)
    a_names = [f"xi_a{i + 1}" for i in range(mx)]
    b_names = [f"xi_b{j + 1}" for j in range(my)]
    parts = [f"{a}*{x}" for a, x in zip(a_names, xnames)]
    parts += [f"{b}*({txt})" for b, txt in zip(b_names, g.texts)]
    phase = " + ".join(parts)
    box = Box(tuple(a_names + b_names), tuple(xi0), rcheck)
    phi = SBFunction.indicator(K, cx, r)
    try:
        pd = build_phase_data(K, phase, xnames, phi, param_boxes=[box])
    except PhaseDataError:
        return None
    return oscillatory_bound(pd, phi), f"oscillatory bound with N_grad={pd.N_grad}, N_R={pd.N_R}"


def wf_values(u: Distribution, x0: Vector, xi: Vector, r: int, lam: FieldElement) -> MotivicScalar:
    """<u, 1_{B(x0,r)} Psi(<., lam xi>)>."""
    return u.query(x0, r, tuple(lam * c for c in xi))


def wf_test(
    u: Distribution,
    x0: Sequence[FieldElement],
    xi0: Sequence[FieldElement],
    r: int = 0,
    rcheck: int | None = None,
    K: int = 6,
    group: LambdaGroup = LambdaGroup(1),
    certify: bool = True,
) -> WFCertificate:
    """Sweep lambda over Lambda_n down to ord lambda = -K n and classify the point."""
    F = u.K
    n = group.n
    rcheck = n if rcheck is None else rcheck
    x0, xi0 = tuple(x0), tuple(xi0)
    if len(x0) != u.m or len(xi0) != u.m:
        raise FieldInputError("point and covector must match the distribution dimension")
    o = _check_covector(xi0, n, rcheck)
    xis = F.enumerate_coset_reps(xi0, rcheck, rcheck)
    levels = []
    for k in range(0, -K - 1, -1):
        depth = max(k * n + 1, 1 - r - o)
        witness = None
        for lam in iter_lambda_reps(F, group, k, depth):
            for xi in xis:
                val = wf_values(u, x0, xi, r, lam)
                if not val.is_zero():
                    witness = {"lambda": str(lam), "ord_lambda": k * n, "xi": [str(c) for c in xi], "value": str(val), "value_at_q": val.eval_at_q(F.q).to_json()}
                    break
            if witness:
                break
        levels.append({"k": k, "ord_lambda": k * n, "nonzero": witness is not None, "witness": witness})
    cert = certify_threshold(u, x0, xi0, r, rcheck) if certify else None
    nonzero = [lv for lv in levels if lv["nonzero"]]
    common = dict(point=x0, covector=xi0, r=r, rcheck=rcheck, n=n, K=K, levels=levels)
    if cert is not None:
        N, basis = cert
        bad = [lv for lv in nonzero if lv["ord_lambda"] < N]
        if bad:
            raise RuntimeError(f"certified threshold {N} contradicted at ord lambda {bad[0]['ord_lambda']}")
        return WFCertificate(verdict=SMOOTH_CERTIFIED, threshold=N, theorem_basis=basis, **common)
    if levels[-1]["nonzero"]:
        return WFCertificate(verdict=NOT_SMOOTH, threshold=None, witness=levels[-1]["witness"], **common)
    N = min(lv["ord_lambda"] for lv in nonzero) if nonzero else 1
    return WFCertificate(verdict=SMOOTH_OBSERVED, threshold=N, **common)


# ---------------------------------------------------------------------------
# Singular support
# ---------------------------------------------------------------------------


@dataclass
class SSResult:
    point: Vector
    r: int
    verdict: str  # "smooth" or "non-smooth-observed"
    support_bound: int | None
    reconstruction: SBFunction | None = None
    witness: dict | None = None

    def to_json(self) -> dict:
        out = {"point": [str(x) for x in self.point], "r": self.r, "verdict": self.verdict, "support_bound": self.support_bound}
        if self.reconstruction is not None:
            out["reconstruction"] = self.reconstruction.to_json()
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def ss_test(u: Distribution, x0: Sequence[FieldElement], r: int = 0, K: int = 6, pw_samples: int = 64) -> SSResult:
    """Try to represent 1_{B(x0,r)} u by an SB function via Paley-Wiener."""
    F = u.K
    x0 = tuple(x.truncate(r) for x in x0)
    phi = SBFunction.indicator(F, x0, r)
    cells = shell_cells(F, u.m, 1, 1)
    lowest = None
    for s in range(-K, 1):
        for cell in cells:
            xi = tuple(c.shift(s) for c in cell)
            val = u.query(x0, r, xi)
            if not val.is_zero():
                if s == -K:
                    witness = {"xi": [str(c) for c in xi], "ord_xi": s, "value": str(val), "value_at_q": val.eval_at_q(F.q).to_json()}
                    return SSResult(x0, r, "non-smooth-observed", None, None, witness)
                lowest = s if lowest is None else min(lowest, s)
    bound = 1 if lowest is None else lowest
    res = paley_wiener_check(u, phi, bound, shell_samples=pw_samples)
    if not res.verdict:
        return SSResult(x0, r, "non-smooth-observed", bound, None, res.witness)
    return SSResult(x0, r, "smooth", bound, res.reconstruction)


# ---------------------------------------------------------------------------
# Projection property
# ---------------------------------------------------------------------------


@dataclass
class ProjectionReport:
    points: list[dict]
    violations: list[dict]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"ok": self.ok, "points": self.points, "violations": self.violations}


def projection_property_check(
    u: Distribution,
    points: Sequence[Vector],
    covectors: Sequence[Vector] | None = None,
    r: int = 0,
    K: int = 3,
    group: LambdaGroup = LambdaGroup(1),
    certificates: Mapping | None = None,
) -> ProjectionReport:
    """Every not-smooth wave front verdict must project to a non-smooth point."""
    F = u.K
    covectors = list(covectors) if covectors is not None else shell_cells(F, u.m, group.n, group.n)
    certificates = dict(certificates or {})
    rows, violations = [], []
    for x in points:
        ss = ss_test(u, x, r, K)
        wf = []
        for xi in covectors:
            key = (tuple(x), tuple(xi))
            cert = certificates.get(key) or wf_test(u, x, xi, r, K=K, group=group)
            wf.append(cert.verdict)
            if cert.verdict == NOT_SMOOTH and ss.verdict == "smooth":
                violations.append({"point": [str(c) for c in x], "covector": [str(c) for c in xi], "witness": cert.witness})
        rows.append({"point": [str(c) for c in x], "ss": ss.verdict, "wf": wf})
    return ProjectionReport(rows, violations)
