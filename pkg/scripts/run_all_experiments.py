#!/usr/bin/env python3
"""Run the full verification experiment battery and write JSON/CSV reports.

The default setup matches the acceptance resolutions; --fast drops to coarse
grids and few instances for a quick smoke run.
"""

import argparse
import sys
from pathlib import Path

from fracreg.experiments import ExperimentParams, run_experiment

FULL = {
    "lp_regularity": dict(refinements=(1 / 16, 1 / 32, 1 / 64), instances=10),
    "energy": dict(refinements=(1 / 32, 1 / 64), instances=20),
    "approximation": dict(refinements=(1 / 32, 1 / 64)),
    "holder": dict(refinements=(1 / 32, 1 / 64), instances=5),
    "linf": dict(refinements=(1 / 32, 1 / 64), instances=5),
    "level_set_decay": dict(refinements=(1 / 32, 1 / 64), instances=5),
    "translation_identity": dict(refinements=(1 / 16, 1 / 32), instances=3),
    "localization": dict(refinements=(1 / 8, 1 / 16), instances=1),
}

FAST = {name: dict(refinements=(1 / 8, 1 / 16), instances=2)
        for name in FULL}
FAST["localization"] = dict(refinements=(1 / 4, 1 / 8), instances=1)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--fast", action="store_true")
    args = ap.parse_args()

    table = FAST if args.fast else FULL
    out = Path(args.out)
    failures = []
    for name, overrides in table.items():
        params = ExperimentParams(seed=args.seed, workers=args.workers,
                                  **overrides)
        report = run_experiment(name, params)
        report.write(out)
        status = "PASS" if report.passed else "FAIL"
        print(f"{status} {name}  ({report.wall_clock:.1f}s)")
        for crit in report.criteria:
            mark = "ok " if crit.passed else "BAD"
            print(f"    [{mark}] {crit.name}"
                  + (f"  {crit.details}" if crit.details else ""))
        if not report.passed:
            failures.append(name)
    if failures:
        print(f"\nfailed experiments: {failures}")
        return 1
    print(f"\nall experiments passed; reports in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
