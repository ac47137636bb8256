"""Tabulate wave front verdicts for the Dirac mass, an SB function and the graph of x^2.

Usage: python3 scripts/wf_sweep.py [--q 3] [--depth 4] [--n 1]
"""

from __future__ import annotations

import argparse

from motivic_wf import distribution as dist
from motivic_wf import microlocal as ml
from motivic_wf.config import Config
from motivic_wf.expr import PolyMap
from motivic_wf.schwartz import SBFunction


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=3)
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--n", type=int, default=1)
    args = ap.parse_args()
    K = Config.for_q(args.q).field()
    z, one = K.zero(), K.one()
    group = ml.LambdaGroup(args.n)
    cases = [
        ("dirac", dist.dirac(K, (z,)), [(z,), (K.t(-1),)]),
        ("from_sb", dist.from_sb(SBFunction.indicator(K, (one,), 0, (K.t(-1),))), [(z,), (one,)]),
        ("graph x^2", dist.graph_distribution(PolyMap.parse("x^2", ["x"], K)), [(z, z), (one, one), (one, z)]),
    ]
    for name, u, points in cases:
        for x0 in points:
            ss = ml.ss_test(u, x0, r=1, K=args.depth)
            print(f"{name:10s} x0={[str(c) for c in x0]} ss={ss.verdict}")
            for xi0 in dist.shell_cells(K, u.m, args.n, args.n):
                cert = ml.wf_test(u, x0, xi0, r=1, K=args.depth, group=group)
                print(f"    xi0={[str(c) for c in xi0]}: {cert.verdict} (threshold {cert.threshold})")


if __name__ == "__main__":
    main()
