"""Compare symbolic Fourier transforms and integrals of random SB functions with brute-force sums.

Usage: python3 scripts/oracle_compare.py [--q 3] [--count 50] [--points 20] [--m 1]
"""

from __future__ import annotations

import argparse
import random
import sys

from motivic_wf.acceptance import NARROW_2D
from motivic_wf.config import Config
from motivic_wf.local_field import BudgetError
from motivic_wf.oracle import brute_fourier, brute_integral
from motivic_wf.sampling import SBShape, random_covector, random_sb
from motivic_wf.schwartz import fourier, integrate


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=3)
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    K = Config.for_q(args.q).field()
    rng = random.Random(args.seed)
    shape = SBShape() if args.m == 1 else NARROW_2D
    mismatches = skipped = 0
    for i in range(args.count):
        phi = random_sb(K, args.m, rng, shape)
        ys = [random_covector(K, args.m, rng, -1, 2) for _ in range(args.points)]
        F = fourier(phi)
        try:
            brute = brute_fourier(phi, ys)
        except BudgetError:
            skipped += 1
            continue
        for y, want in zip(ys, brute):
            if F.evaluate(y).eval_at_q(K.q) != want:
                mismatches += 1
                print(f"function {i}: mismatch at {[str(c) for c in y]}")
        if integrate(phi).eval_at_q(K.q) != brute_integral(phi):
            mismatches += 1
            print(f"function {i}: integral mismatch")
    total = (args.count - skipped) * (args.points + 1)
    print(f"{total - mismatches}/{total} comparisons agree (q={K.q}, m={args.m}; {skipped} functions over budget)")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
