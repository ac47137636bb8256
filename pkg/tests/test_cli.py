from __future__ import annotations

import json

import pytest

from motivic_wf import cli
from motivic_wf.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_INPUT, EXIT_OK, EXIT_ORACLE, main

BALL0 = json.dumps([{"coeff": "1", "center": ["0"], "radius": 0, "freq": ["0"]}])
BALL1 = json.dumps([{"coeff": "1", "center": ["0"], "radius": 1, "freq": ["0"]}])
TWISTED = json.dumps([{"coeff": "1", "center": ["t^0*[1]"], "radius": 0, "freq": ["t^-1*[1]"]}])
DIRAC = json.dumps({"kind": "dirac", "point": ["0"]})
GRAPH = json.dumps({"kind": "graph", "vars": ["x"], "map": ["x^2"]})
FUNC = json.dumps({"kind": "function", "sb": json.loads(TWISTED)})


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_fourier_of_unit_ball(capsys):
    code, out = run(capsys, "fourier", BALL0, "--oracle")
    assert code == EXIT_OK
    assert out["result"] == [{"coeff": "1", "center": "0", "radius": 1, "freq": "0"}]
    assert out["oracle"]["agree"]


def test_convolve_with_small_ball(capsys):
    code, out = run(capsys, "convolve", TWISTED, json.dumps([{"coeff": "1", "center": ["0"], "radius": 3, "freq": ["0"]}]), "--oracle", "--points", "5")
    assert code == EXIT_OK
    assert len(out["result"]) == 1 and out["result"][0]["coeff"] == "L^-3"


def test_integrate_small_ball(capsys):
    code, out = run(capsys, "integrate", BALL1, "--oracle")
    assert code == EXIT_OK
    assert out["value"]["symbolic"] == "L^-1"
    assert out["value"]["value_at_q"] == "1/3"


def test_multiply_and_oracle_compare(capsys):
    code, out = run(capsys, "multiply", BALL0, BALL1, "--oracle")
    assert code == EXIT_OK and out["result"] == [{"coeff": "1", "center": "0", "radius": 1, "freq": "0"}]
    code, out = run(capsys, "oracle-compare", TWISTED, "--points", "10")
    assert code == EXIT_OK and out["fourier"]["agree"] and out["integral"]["agree"]


@pytest.mark.parametrize(
    "dist_json,point,covector,verdict",
    [
        (DIRAC, "0", "1", "not-smooth"),
        (GRAPH, "0,0", "1,0", "smooth-certified"),
        (FUNC, "0", "1", "smooth-certified"),
        (FUNC, "t^-1", "t", None),
    ],
)
def test_wf_test(capsys, dist_json, point, covector, verdict):
    code, out = run(capsys, "wf-test", dist_json, "--point", point, "--covector", covector, "--depth", "3")
    if verdict is None:  # ord xi0 outside the shell
        assert code == EXIT_INPUT
    else:
        assert code == EXIT_OK and out["verdict"] == verdict


def test_ss_test(capsys):
    code, out = run(capsys, "ss-test", DIRAC, "--point", "0", "--depth", "3")
    assert code == EXIT_OK and out["verdict"] == "non-smooth-observed"
    code, out = run(capsys, "ss-test", DIRAC, "--point", "t^-1", "--depth", "3")
    assert code == EXIT_OK and out["verdict"] == "smooth"


def test_eval_average_formula(capsys):
    code, out = run(capsys, "eval", FUNC, "--sb", BALL0)
    assert code == EXIT_OK
    assert out["average_formula"]["value_at_q"] == out["termwise"]["value_at_q"]


def test_pullback_tensor_product(capsys):
    queries = json.dumps([{"center": ["0"], "radius": 0}, {"center": ["t^0*[1]"], "radius": 1, "freq": ["t^-1*[2]"]}])
    code, out = run(capsys, "pullback", FUNC, "--map", "x + t^-1", "--queries", queries)
    assert code == EXIT_OK and len(out["queries"]) == 2
    code, out = run(capsys, "tensor", DIRAC, DIRAC)
    assert code == EXIT_OK and out["queries"][0]["value"]["symbolic"] == "1"
    code, out = run(capsys, "product", FUNC, json.dumps({"kind": "function", "sb": json.loads(BALL0)}), "--queries", queries)
    assert code == EXIT_OK


def test_dirac_squared_reports_failure(capsys):
    code, out = run(capsys, "product", DIRAC, DIRAC)
    assert code == EXIT_FAIL and out["error"] == "SmoothDataError"
    assert out["witness"]


def test_parse_check(capsys):
    code, out = run(capsys, "parse-check", "ac(x) = 1 and ord(x) mod 2 = 0")
    assert code == EXIT_OK and out["sort"] == "bool" and out["round_trip"]


@pytest.mark.parametrize(
    "argv",
    [
        ["fourier", "{not json"],
        ["fourier", json.dumps([{"coeff": "1", "center": ["0", "0"], "radius": 0, "freq": ["0"]}])],
        ["parse-check", "ord(x"],
        ["fourier", BALL0, "--q", "6"],
        ["wf-test", DIRAC, "--point", "0", "--covector", "0"],
    ],
)
def test_bad_input_exit_code(capsys, argv):
    code, out = run(capsys, *argv)
    assert code == EXIT_INPUT and "error" in out


def test_budget_exit_code(capsys):
    wide = json.dumps([{"coeff": "1", "center": ["0"], "radius": -30, "freq": ["0"]}])
    code, out = run(capsys, "fourier", wide, "--oracle", "--budget", "10")
    assert code == EXIT_BUDGET and out["error"] == "BudgetError"


def test_corrupted_fourier_detected(capsys, monkeypatch):
    # negative control: a wrong normalization constant must trip the oracle
    real = cli.fourier
    monkeypatch.setattr(cli, "fourier", lambda phi: real(phi).times_L(1))
    code, out = run(capsys, "fourier", BALL0, "--oracle")
    assert code == EXIT_ORACLE and out["oracle"]["mismatches"]


def test_deterministic_output(capsys, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"out{i}.json"
        code = main(["fourier", TWISTED, "--oracle", "--json-out", str(path)])
        capsys.readouterr()
        assert code == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"q": 5, "K": 2}))
    code, out = run(capsys, "integrate", BALL1, "--config", str(cfg))
    assert code == EXIT_OK and out["value"]["value_at_q"] == "1/5"


def test_selftest_subset(capsys):
    code = main(["selftest", "--criteria", "1,2,8,13", "--quiet", "--q", "2"])
    report = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK and report["all_passed"]
    assert [c["criterion"] for c in report["criteria"]] == [1, 2, 8, 13]


def test_selftest_reports_failure(capsys, monkeypatch):
    from motivic_wf import acceptance

    monkeypatch.setattr(acceptance, "CRITERIA", [(1, "broken", 1, lambda cfg: (False, "forced"))])
    code = main(["selftest", "--quiet"])
    report = json.loads(capsys.readouterr().out)
    assert code == EXIT_FAIL and not report["all_passed"]
