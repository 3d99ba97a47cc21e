#!/usr/bin/env python3
"""Run every preset in compare mode and print a slope-vs-EMP summary table.

Outputs (JSON, CSV, SVG per case) go to --out-dir, default ``out/figures``.
"""
import argparse
import logging
import time
import warnings

from steklov.cli import run_experiment, write_outputs
from steklov.config import PRESETS, preset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="out/figures")
    ap.add_argument("--only", choices=PRESETS, nargs="*")
    args = ap.parse_args()
    logging.basicConfig(level=logging.ERROR)
    warnings.simplefilter("ignore", UserWarning)

    print(f"{'case':28s} {'eigen':>10s} {'residual':>10s}  match  slopes / EMP")
    for name in args.only or PRESETS:
        for cfg in preset(name):
            t0 = time.perf_counter()
            art = run_experiment(cfg)
            write_outputs(art, args.out_dir)
            for b in art.report["eigenvalues"]:
                tag = f"({b['eigen']['degree']},{b['eigen']['branch']})"
                if "slope_error" in b:
                    print(f"{cfg.name:28s} {tag:>10s} {'-':>10s}  -      {b['slope_error']}")
                    continue
                slopes = " ".join(f"{s:+.3f}" for s in b["right_slopes"])
                emp = " ".join(f"{s:+.3f}" for s in b["emp_eigenvalues"])
                print(f"{cfg.name:28s} {tag:>10s} {b['match_residual']:10.2e}  "
                      f"{'yes' if b['match'] else 'NO ':5s}  {slopes} / {emp}")
            print(f"{'':28s} ({time.perf_counter() - t0:.2f}s)")


if __name__ == "__main__":
    main()
