"""Run the acceptance criteria and print one pass/fail line per criterion.

Usage: python3 scripts/run_acceptance.py [--q 3] [--criteria 1,4,9] [--json-out report.json]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from motivic_wf.acceptance import run_all
from motivic_wf.config import Config


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--criteria", help="comma separated criterion numbers")
    ap.add_argument("--json-out")
    args = ap.parse_args()
    cfg = Config.for_q(args.q, seed=args.seed)
    numbers = [int(s) for s in args.criteria.split(",")] if args.criteria else None
    results = run_all(cfg, numbers, echo=print)
    passed = sum(r.ok for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    if args.json_out:
        Path(args.json_out).write_text(json.dumps([r.to_json() for r in results], indent=2) + "\n")
    return 0 if passed == len(results) else 1


if __name__ == "__main__":
    sys.exit(main())
