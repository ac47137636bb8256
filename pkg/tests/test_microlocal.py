from __future__ import annotations

import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from motivic_wf import distribution as dist
from motivic_wf import microlocal as ml
from motivic_wf.coeff_ring import MotivicScalar
from motivic_wf.expr import PolyMap
from motivic_wf.local_field import FieldInputError, LocalField, psi_exponent
from motivic_wf.oracle import brute_ball_integral
from motivic_wf.sampling import SBShape, random_sb
from motivic_wf.schwartz import SBFunction, twist

K = LocalField.make(3)
Z, ONE = K.zero(), K.one()
SMALL = SBShape(max_terms=3, radius=(-1, 1), freq_ord=(-1, 1), center_low=-1)


def graph_x2():
    return dist.graph_distribution(PolyMap.parse("x^2", ["x"], K))


# Lambda_n ---------------------------------------------------------------------


def test_lambda_reps_examples():
    g1 = ml.LambdaGroup(1)
    assert ml.lambda_reps(K, g1, 0, 1) == [ONE]
    assert ml.lambda_reps(K, g1, 0, 2) == [ONE, ONE + K.t(1), ONE + K.t(1, 2)]
    reps = ml.lambda_reps(K, ml.LambdaGroup(2), -1, 0)
    assert reps and all(x.ord() == -2 and x.ac() == 1 for x in reps)


def test_lambda_depth_precondition():
    with pytest.raises(FieldInputError):
        ml.lambda_reps(K, ml.LambdaGroup(1), 0, 0)


@given(st.integers(-3, 3), st.integers(1, 3), st.integers(0, 2))
def test_lambda_membership(k, n, extra):
    group = ml.LambdaGroup(n)
    for lam in ml.lambda_reps(K, group, k, k * n + 1 + extra):
        assert group.contains(lam)
        assert lam.ord() == k * n and lam.ac() == 1
    assert not group.contains(K.t(k * n, 2))
    if n > 1:
        assert not group.contains(K.t(k * n + 1))


# oscillatory bound --------------------------------------------------------------


def test_linear_phase_bound():
    phi = SBFunction.ball(K, 1, 0)
    pd = ml.build_phase_data(K, "v*x", ["x"], phi, params={"v": ONE})
    assert pd.N_grad == 0 and pd.nr_capped
    N = ml.oscillatory_bound(pd, phi)
    assert N == -phi.alpha_plus
    for k in range(N - 1, N - 4, -1):
        for lam in ml.lambda_reps(K, ml.LambdaGroup(1), k, 1):
            assert ml.oscillatory_integral(phi, pd, lam, {"v": ONE}).is_zero()


def test_square_phase_on_unit_ball_has_critical_point():
    # grad(x^2) = 2x vanishes at 0, so no finite N_grad exists on B_0
    with pytest.raises(ml.PhaseDataError) as info:
        ml.build_phase_data(K, "x^2", ["x"], SBFunction.ball(K, 1, 0))
    assert info.value.witness


def test_square_phase_off_critical_point():
    phi = SBFunction.indicator(K, (ONE,), 1)
    pd = ml.build_phase_data(K, "x^2", ["x"], phi)
    assert pd.N_grad == 0 and pd.N_R == 0
    assert ml.oscillatory_bound(pd, phi) == -max(pd.N_grad - pd.N_R + 1, phi.alpha_plus) - pd.N_grad


def test_oscillatory_integral_examples():
    pd = ml.build_phase_data(K, "x", ["x"], SBFunction.ball(K, 1, 0))
    assert ml.oscillatory_integral(SBFunction.ball(K, 1, 0), pd, ONE).is_zero()
    assert ml.oscillatory_integral(SBFunction.ball(K, 1, 1), pd, ONE) == MotivicScalar.one(3).times_L(-1)


@pytest.mark.parametrize("lam_text", ["t^-1*[1]", "t^-1*[1] + t^0*[2]", "t^-2*[1] + t^-1*[1]"])
def test_square_integral_matches_brute_force(lam_text):
    lam = K.parse(lam_text)
    phi = SBFunction.ball(K, 1, 0)
    pd = ml.PhaseData("x^2", ("x",), (), 0, 0, [["1"]], [((Z,), 0)], False, 0)
    got = ml.oscillatory_integral(phi, pd, lam).eval_at_q(3)
    D = 1 - lam.ord()
    want = brute_ball_integral(K, (Z,), 0, D + 1, lambda x: (True, psi_exponent((x[0] * x[0],), (lam,))))
    assert got == want


def test_lambda_outside_group_rejected():
    phi = SBFunction.ball(K, 1, 0)
    pd = ml.build_phase_data(K, "x", ["x"], phi)
    with pytest.raises(FieldInputError):
        ml.oscillatory_integral(phi, pd, K.t(0, 2), group=ml.LambdaGroup(1))


def test_uncovered_support_rejected():
    pd = ml.build_phase_data(K, "x", ["x"], SBFunction.ball(K, 1, 1))
    with pytest.raises(ml.PhaseDataError):
        ml.oscillatory_bound(pd, SBFunction.ball(K, 1, 0))


# wf_test --------------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2])
def test_dirac_not_smooth(n):
    d = dist.dirac(K, (Z,))
    for xi0 in dist.shell_cells(K, 1, n, n):
        cert = ml.wf_test(d, (Z,), xi0, K=3, group=ml.LambdaGroup(n))
        assert cert.verdict == ml.NOT_SMOOTH
        assert cert.witness["value"] == "1"


def test_from_sb_certified_with_closed_form_threshold():
    phi = SBFunction.indicator(K, (ONE,), 0, (K.t(-2),)) + SBFunction.ball(K, 1, 1)
    u = dist.from_sb(phi)
    for x0 in [(Z,), (ONE,), (K.t(-1),)]:
        for r in (0, 1):
            cert = ml.wf_test(u, x0, (ONE,), r=r, K=4)
            assert cert.verdict == ml.SMOOTH_CERTIFIED
            assert cert.threshold == 1 - max(phi.alpha_plus, r) - 0


def test_graph_dichotomy():
    u = graph_x2()
    origin = (Z, Z)
    assert ml.wf_test(u, origin, (ONE, Z), K=4).verdict == ml.SMOOTH_CERTIFIED
    sing = ml.wf_test(u, origin, (Z, ONE), K=4)
    assert sing.verdict == ml.NOT_SMOOTH
    assert not MotivicScalar.parse(sing.witness["value"], 3).is_zero()


def test_covector_preconditions():
    d = dist.dirac(K, (Z,))
    with pytest.raises(FieldInputError):
        ml.wf_test(d, (Z,), (Z,))
    with pytest.raises(FieldInputError):
        ml.wf_test(d, (Z,), (K.t(1),), group=ml.LambdaGroup(1))
    with pytest.raises(FieldInputError):
        ml.wf_test(d, (Z,), (ONE,), rcheck=0)


def test_certificate_json_schema():
    cert = ml.wf_test(dist.dirac(K, (Z,)), (Z,), (ONE,), K=2)
    data = json.loads(json.dumps(cert.to_json()))
    assert {"point", "covector", "r", "rcheck", "n", "K", "verdict", "threshold", "witness"} <= set(data)
    cert = ml.wf_test(dist.from_sb(SBFunction.ball(K, 1, 0)), (Z,), (ONE,), K=2)
    assert "theorem_basis" in cert.to_json()


def test_heifetz_consistency():
    phi = random_sb(K, 1, random.Random(4), SMALL)
    u = dist.from_sb(phi)
    x0, xi = (ONE,), (ONE,)
    for lam in ml.lambda_reps(K, ml.LambdaGroup(1), -2, -1):
        loc = twist(SBFunction.indicator(K, x0, 0), (lam * xi[0],))
        assert ml.wf_values(u, x0, xi, 0, lam) == u.pair(loc)
        assert dist.agree(ml.wf_values(u, x0, xi, 0, lam), dist.eval_on_sb(u, loc), 3)


CONIC_CASES = [
    ("dirac", lambda: dist.dirac(K, (Z,)), (Z,), (ONE,)),
    ("from_sb", lambda: dist.from_sb(SBFunction.ball(K, 1, 0)), (Z,), (ONE,)),
    ("graph-smooth", graph_x2, (Z, Z), (ONE, Z)),
    ("graph-conormal", graph_x2, (Z, Z), (Z, ONE)),
]


@pytest.mark.parametrize("name,make,x0,xi0", CONIC_CASES, ids=[c[0] for c in CONIC_CASES])
def test_conicity(name, make, x0, xi0):
    u = make()
    base = ml.wf_test(u, x0, xi0, K=3).verdict
    for lam in ml.lambda_reps(K, ml.LambdaGroup(1), 0, 2):
        scaled = tuple(lam * c for c in xi0)  # already in the shell for n = 1
        assert ml.wf_test(u, x0, scaled, rcheck=2, K=3).verdict == base


@pytest.mark.parametrize("name,make,x0,xi0", CONIC_CASES, ids=[c[0] for c in CONIC_CASES])
def test_certificate_monotonicity(name, make, x0, xi0):
    u = make()
    verdicts = [ml.wf_test(u, x0, xi0, K=k).verdict for k in (1, 2, 4)]
    for a, b in zip(verdicts, verdicts[1:]):
        if a == ml.SMOOTH_CERTIFIED:
            assert b == ml.SMOOTH_CERTIFIED
        if a == ml.SMOOTH_OBSERVED:
            assert b in (ml.SMOOTH_OBSERVED, ml.NOT_SMOOTH)


def test_observed_fallback_for_uncertifiable_kind():
    # the Fourier transform of a Dirac is the constant 1: smooth but not certifiable here
    u = dist.fourier_distribution(dist.dirac(K, (Z,)))
    cert = ml.wf_test(u, (Z,), (ONE,), K=3)
    assert cert.verdict == ml.SMOOTH_OBSERVED
    assert cert.theorem_basis is None


# ss_test / projection -----------------------------------------------------------


def test_ss_examples():
    phi = SBFunction.indicator(K, (ONE,), 0, (K.t(-1),))
    for x0 in [(Z,), (ONE,), (K.t(-1),)]:
        res = ml.ss_test(dist.from_sb(phi), x0, r=0, K=3)
        assert res.verdict == "smooth"
    d = dist.dirac(K, (Z,))
    at0 = ml.ss_test(d, (Z,), r=0, K=3)
    assert at0.verdict == "non-smooth-observed" and at0.witness["value"] == "1"
    away = ml.ss_test(d, (K.t(-1),), r=0, K=3)
    assert away.verdict == "smooth" and away.reconstruction.is_zero()


def test_ss_reconstruction_is_localized_transform():
    phi = SBFunction.ball(K, 1, 0)
    res = ml.ss_test(dist.from_sb(phi), (Z,), r=0, K=3)
    assert res.reconstruction.same_function(SBFunction.ball(K, 1, 1))


def test_projection_reports():
    d = dist.dirac(K, (Z,))
    rep = ml.projection_property_check(d, [(Z,), (ONE,), (K.t(-1),)], r=1, K=2)
    assert rep.ok
    assert [row["ss"] for row in rep.points] == ["non-smooth-observed", "smooth", "smooth"]
    assert rep.points[0]["wf"] == [ml.NOT_SMOOTH] * 2
    u = dist.from_sb(SBFunction.ball(K, 1, 0))
    assert ml.projection_property_check(u, [(Z,), (K.t(-1),)], K=2).ok
    g = ml.projection_property_check(graph_x2(), [(Z, Z), (ONE, Z)], r=1, K=2)
    assert g.ok
    assert [row["ss"] for row in g.points] == ["non-smooth-observed", "smooth"]


def test_projection_flags_inconsistent_certificates():
    d = dist.dirac(K, (Z,))
    fake = ml.WFCertificate((ONE,), (ONE,), 1, 1, 1, 1, ml.NOT_SMOOTH, None, {"value": "1"})
    rep = ml.projection_property_check(d, [(ONE,)], covectors=[(ONE,)], r=1, K=1, certificates={((ONE,), (ONE,)): fake})
    assert not rep.ok and rep.violations[0]["point"] == [str(ONE)]
