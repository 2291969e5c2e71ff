#!/usr/bin/env python3
"""Run every experiment scenario at its default configuration.

Writes one JSON report per scenario into --outdir and prints the verdict
lines.  Exit status is nonzero if any verdict fails (the default
quantum_norm_convergence cap is expected to fail at n=400; see README).
"""
import argparse
import json
import os
import sys

from randcorr.experiments import SCENARIOS, default_config, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="reports")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--quick", action="store_true",
                    help="cut trial counts for a fast sanity pass")
    ap.add_argument("--scenario", action="append", default=None,
                    help="run only these scenarios (repeatable)")
    args = ap.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    wanted = args.scenario or SCENARIOS
    all_ok = True
    for name in wanted:
        cfg = default_config(name, master_seed=args.seed)
        if args.quick:
            cfg.trials = max(1, cfg.trials // 10)
        report = run_experiment(cfg, threads=args.threads)
        path = os.path.join(args.outdir, f"{name}.json")
        with open(path, "w") as fh:
            fh.write(json.dumps(report.to_dict(), sort_keys=True, indent=2))
            fh.write("\n")
        status = "ok" if report.passed() else "VERDICT FAILURE"
        print(f"{name}: {status} ({report.wall_clock_s:.1f}s) -> {path}")
        for v in report.verdicts:
            print(f"  [{'PASS' if v.passed else 'FAIL'}] {v.name}: "
                  f"value={v.value:.6g} threshold={v.threshold:.6g}")
        all_ok = all_ok and report.passed()
    return 0 if all_ok else 3


if __name__ == "__main__":
    sys.exit(main())
