"""Command line driver: ``motivic-wf <command> ...`` with JSON output.

Exit codes: 0 success, 1 selftest failure, 2 bad input, 3 budget or
precision exhausted, 4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Any

from . import acceptance
from . import distribution as dist
from . import microlocal as ml
from .coeff_ring import CoefficientError, MotivicScalar
from .config import Config, ConfigError
from .expr import ExprError, FIELD, PolyMap, parse, sort_of, to_polynomial, to_text
from .local_field import BudgetError, FieldElement, FieldInputError, LocalField, PrecisionError
from .oracle import brute_convolution, brute_fourier, brute_integral
from .sampling import random_covector, random_point
from .schwartz import SBFunction, convolve, fourier, integrate, multiply

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET, EXIT_ORACLE = 0, 1, 2, 3, 4


class InputError(ValueError):
    """Malformed command line input."""


class OracleMismatch(RuntimeError):
    def __init__(self, report: dict):
        super().__init__("oracle mismatch")
        self.report = report


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------


def load_json(arg: str) -> Any:
    """A JSON literal, a path to a JSON file, or '-' for stdin."""
    if arg == "-":
        text = sys.stdin.read()
    elif Path(arg).is_file():
        text = Path(arg).read_text()
    else:
        text = arg
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not JSON and not a readable file: {arg[:60]!r}") from exc


def parse_element(K: LocalField, text: str) -> FieldElement:
    """Canonical "t^-1*[2] + t^0*[1]" form, or a constant term such as "t^-1 + 2*t"."""
    try:
        return K.parse(text)
    except FieldInputError:
        node = parse(text, sort=FIELD)
        return to_polynomial(node, [], K).evaluate(())


def parse_vector(K: LocalField, value) -> tuple[FieldElement, ...]:
    if isinstance(value, str):
        value = [s for s in value.split(",")] if "," in value else [value]
    return tuple(parse_element(K, str(s)) for s in value)


def load_sb(K: LocalField, arg: str) -> SBFunction:
    data = load_json(arg)
    return SBFunction.from_json(K, data)


def scalar_json(s: MotivicScalar, q: int) -> dict:
    return s.to_json(q)


def load_queries(K: LocalField, arg: str | None, m: int) -> list[tuple]:
    if arg is None:
        zero = K.zeros(m)
        return [(zero, 0, zero)]
    data = load_json(arg)
    if not isinstance(data, list):
        raise InputError("queries must be a JSON list")
    out = []
    for item in data:
        c = parse_vector(K, item["center"])
        xi = parse_vector(K, item.get("freq", ["0"] * m))
        out.append((c, int(item["radius"]), xi))
    return out


def query_report(u: dist.Distribution, queries, q: int) -> list[dict]:
    rows = []
    for c, a, xi in queries:
        val = u.query(c, a, xi)
        rows.append({"center": [str(x) for x in c], "radius": a, "freq": [str(x) for x in xi], "value": scalar_json(val, q)})
    return rows


def smooth_data(args) -> dist.SmoothData:
    return dist.SmoothData(n=args.n if args.n else 1, R_y=args.r_y, xi_floor=args.xi_floor)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _sample_points(K: LocalField, m: int, rng: random.Random, count: int):
    return [random_covector(K, m, rng) for _ in range(count)]


def cmd_fourier(args, cfg, K):
    phi = load_sb(K, args.input)
    out = {"result": fourier(phi).to_json()}
    if args.oracle:
        rng = random.Random(cfg.seed)
        F = fourier(phi)
        ys = _sample_points(K, phi.m, rng, args.points)
        got = [F.evaluate(y).eval_at_q(K.q) for y in ys]
        want = brute_fourier(phi, ys)
        out["oracle"] = _oracle_block(ys, got, want)
    return out


def _oracle_block(points, got, want) -> dict:
    bad = [
        {"point": [str(c) for c in y], "symbolic": a.to_json(), "brute_force": b.to_json()}
        for y, a, b in zip(points, got, want)
        if a != b
    ]
    block = {"checked": len(points), "agree": not bad}
    if bad:
        block["mismatches"] = bad
        raise OracleMismatch(block)
    return block


def cmd_convolve(args, cfg, K):
    phi, psi = load_sb(K, args.input), load_sb(K, args.other)
    res = convolve(phi, psi)
    out = {"result": res.to_json()}
    if args.oracle:
        rng = random.Random(cfg.seed)
        xs = [random_point(K, phi.m, rng) for _ in range(args.points)]
        got = [res.evaluate(x).eval_at_q(K.q) for x in xs]
        out["oracle"] = _oracle_block(xs, got, brute_convolution(phi, psi, xs))
    return out


def cmd_multiply(args, cfg, K):
    phi, psi = load_sb(K, args.input), load_sb(K, args.other)
    res = multiply(phi, psi)
    out = {"result": res.to_json()}
    if args.oracle:
        rng = random.Random(cfg.seed)
        xs = [random_point(K, phi.m, rng) for _ in range(args.points)]
        got = [res.evaluate(x).eval_at_q(K.q) for x in xs]
        want = [(phi.evaluate(x) * psi.evaluate(x)).eval_at_q(K.q) for x in xs]
        out["oracle"] = _oracle_block(xs, got, want)
    return out


def cmd_integrate(args, cfg, K):
    phi = load_sb(K, args.input)
    val = integrate(phi)
    out = {"value": scalar_json(val, K.q)}
    if args.oracle:
        out["oracle"] = _oracle_block([()], [val.eval_at_q(K.q)], [brute_integral(phi)])
    return out


def load_distribution(K: LocalField, arg: str, data: dist.SmoothData | None = None) -> dist.Distribution:
    desc = load_json(arg)
    return dist.from_descriptor(K, desc, data)


def cmd_eval(args, cfg, K):
    u = load_distribution(K, args.distribution)
    out: dict = {"distribution": u.describe()}
    if args.sb:
        phi = SBFunction.from_json(K, load_json(args.sb), u.m)
        out["average_formula"] = scalar_json(dist.eval_on_sb(u, phi), K.q)
        out["termwise"] = scalar_json(u.pair(phi), K.q)
    if args.queries or not args.sb:
        out["queries"] = query_report(u, load_queries(K, args.queries, u.m), K.q)
    return out


def cmd_wf_test(args, cfg, K):
    u = load_distribution(K, args.distribution)
    x0 = parse_vector(K, args.point)
    xi0 = parse_vector(K, args.covector)
    n = args.n or cfg.n
    cert = ml.wf_test(u, x0, xi0, r=cfg.r if args.r is None else args.r, rcheck=args.rcheck, K=cfg.K, group=ml.LambdaGroup(n))
    return cert.to_json()


def cmd_ss_test(args, cfg, K):
    u = load_distribution(K, args.distribution)
    x0 = parse_vector(K, args.point)
    res = ml.ss_test(u, x0, r=cfg.r if args.r is None else args.r, K=cfg.K)
    return res.to_json()


def cmd_pullback(args, cfg, K):
    u = load_distribution(K, args.distribution)
    names = args.vars.split(",")
    f = PolyMap.parse(args.map.split(";"), names, K)
    pb = dist.pullback(f, u, smooth_data(args))
    return {"distribution": pb.describe(), "queries": query_report(pb, load_queries(K, args.queries, pb.m), K.q)}


def cmd_tensor(args, cfg, K):
    u = load_distribution(K, args.distribution)
    v = load_distribution(K, args.other)
    w = dist.tensor(u, v)
    return {"distribution": w.describe(), "queries": query_report(w, load_queries(K, args.queries, w.m), K.q)}


def cmd_product(args, cfg, K):
    u = load_distribution(K, args.distribution)
    v = load_distribution(K, args.other)
    w = dist.diagonal_product(u, v, smooth_data(args))
    return {"distribution": w.describe(), "queries": query_report(w, load_queries(K, args.queries, w.m), K.q)}


def cmd_oracle_compare(args, cfg, K):
    phi = load_sb(K, args.input)
    rng = random.Random(cfg.seed)
    ys = _sample_points(K, phi.m, rng, args.points)
    F = fourier(phi)
    got = [F.evaluate(y).eval_at_q(K.q) for y in ys]
    return {"fourier": _oracle_block(ys, got, brute_fourier(phi, ys)), "integral": _oracle_block([()], [integrate(phi).eval_at_q(K.q)], [brute_integral(phi)])}


def cmd_selftest(args, cfg, K):
    numbers = [int(s) for s in args.criteria.split(",")] if args.criteria else None
    echo = (lambda line: print(line, file=sys.stderr)) if not args.quiet else None
    results = acceptance.run_all(cfg, numbers, echo=echo)
    report = {"config": cfg.to_dict(), "criteria": [r.to_json() for r in results], "all_passed": all(r.ok for r in results)}
    return report


def cmd_parse_check(args, cfg, K):
    int_vars = args.int_vars.split(",") if args.int_vars else ()
    res_vars = args.res_vars.split(",") if args.res_vars else ()
    node = parse(args.text, int_vars=int_vars, res_vars=res_vars)
    canon = to_text(node)
    return {"canonical": canon, "sort": sort_of(node), "round_trip": parse(canon, int_vars=int_vars, res_vars=res_vars) == node}


COMMANDS = {
    "fourier": cmd_fourier,
    "convolve": cmd_convolve,
    "integrate": cmd_integrate,
    "multiply": cmd_multiply,
    "eval": cmd_eval,
    "wf-test": cmd_wf_test,
    "ss-test": cmd_ss_test,
    "pullback": cmd_pullback,
    "tensor": cmd_tensor,
    "product": cmd_product,
    "oracle-compare": cmd_oracle_compare,
    "selftest": cmd_selftest,
    "parse-check": cmd_parse_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--q", type=int, help="shortcut for a default residue field of size q")
    common.add_argument("--oracle", action="store_true", help="compare with brute-force character sums")
    common.add_argument("--depth", type=int, help="sweep depth K")
    common.add_argument("--budget", type=int, help="enumeration budget")
    common.add_argument("--json-out", help="also write the JSON report here")
    common.add_argument("--points", type=int, default=20, help="oracle sample points")

    p = argparse.ArgumentParser(prog="motivic-wf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    for name in ("fourier", "integrate", "oracle-compare"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("input", help="SB function JSON (literal, file, or -)")
    for name in ("convolve", "multiply"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("input")
        s.add_argument("other")

    s = sub.add_parser("eval", parents=[common])
    s.add_argument("distribution", help="distribution descriptor JSON")
    s.add_argument("--sb", help="test function JSON for the average formula")
    s.add_argument("--queries", help="JSON list of {center, radius, freq}")

    for name in ("wf-test", "ss-test"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("distribution")
        s.add_argument("--point", required=True, help="comma separated coordinates")
        if name == "wf-test":
            s.add_argument("--covector", required=True)
            s.add_argument("--rcheck", type=int)
            s.add_argument("--n", type=int)
        s.add_argument("--r", type=int)

    for name in ("pullback", "tensor", "product"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("distribution")
        if name == "pullback":
            s.add_argument("--map", required=True, help="components separated by ';'")
            s.add_argument("--vars", default="x")
        else:
            s.add_argument("other")
        s.add_argument("--queries")
        s.add_argument("--n", type=int)
        s.add_argument("--r-y", type=int, dest="r_y")
        s.add_argument("--xi-floor", type=int, dest="xi_floor")

    s = sub.add_parser("selftest", parents=[common])
    s.add_argument("--criteria", help="comma separated criterion numbers")
    s.add_argument("--quiet", action="store_true")

    s = sub.add_parser("parse-check", parents=[common])
    s.add_argument("text")
    s.add_argument("--int-vars")
    s.add_argument("--res-vars")
    return p


def make_config(args) -> Config:
    cfg = Config.load(args.config) if args.config else Config()
    over = cfg.to_dict()
    over.pop("q")
    if args.q:
        base = Config.for_q(args.q)
        over.update(p=base.p, f=base.f, modulus=base.modulus)
    if args.depth is not None:
        over["K"] = args.depth
    if args.budget is not None:
        over["budget"] = args.budget
    return Config.from_dict(over)


def emit(report: dict, path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=str)
    print(text)
    if path:
        Path(path).write_text(text + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        K = cfg.field()
        report = COMMANDS[args.command](args, cfg, K)
    except OracleMismatch as exc:
        emit({"error": "oracle mismatch", "oracle": exc.report}, args.json_out)
        return EXIT_ORACLE
    except (BudgetError, PrecisionError) as exc:
        emit({"error": type(exc).__name__, "message": str(exc)}, args.json_out)
        return EXIT_BUDGET
    except (InputError, ConfigError, FieldInputError, ExprError, CoefficientError, KeyError, TypeError, ValueError) as exc:
        emit({"error": type(exc).__name__, "message": str(exc)}, args.json_out)
        return EXIT_INPUT
    except (dist.DistributionError, ml.PhaseDataError) as exc:
        emit({"error": type(exc).__name__, "message": str(exc), "witness": getattr(exc, "witness", None)}, args.json_out)
        return EXIT_FAIL
    emit(report, args.json_out)
    if args.command == "selftest" and not report["all_passed"]:
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
