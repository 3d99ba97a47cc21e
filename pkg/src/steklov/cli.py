"""Batch runner: ``steklov <mode> --config FILE | --preset NAME [--out-dir DIR]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional

import argparse
import csv
import json
import logging
import math
import os
import sys

import numpy as np

from . import mps as mps_mod
from .config import MODES, PRESETS, ConfigError, config_to_dict, parse_config, preset
from .perturbation import emp_matrix, subdifferential_and_classify
from .spectra import enumerate_spectrum, steklov_eigen
from .svg import render_plot_svg

log = logging.getLogger("steklov")

SLOPE_REL_TOL = 0.02
SLOPE_FLOOR = 0.5  # below this magnitude the 2% relative test becomes an absolute 1e-2 test


@dataclass
class Artifacts:
    name: str
    report: dict
    branches: Optional[mps_mod.BranchData] = None
    plot_columns: Optional[List[int]] = None
    tangents: List[tuple] = field(default_factory=list)


def match_residual(slopes, emp_eigs):
    """Max over ascending pairs of |s - e| / max(|e|, 0.5)."""
    s, e = np.sort(np.asarray(slopes, float)), np.sort(np.asarray(emp_eigs, float))
    if s.shape != e.shape:
        raise ValueError("slope and EMP multisets differ in size")
    if s.size == 0:
        return 0.0
    return float(np.max(np.abs(s - e) / np.maximum(np.abs(e), SLOPE_FLOOR)))


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _eigen_dict(e):
    return {"value": e.value, "degree": e.degree, "branch": e.branch,
            "multiplicity": e.multiplicity, "index": e.index}


def _emp_block(cfg, field, sel):
    e = steklov_eigen(cfg.domain, sel.n, sel.k)
    M = emp_matrix(cfg.domain, field, e)
    cls = subdifferential_and_classify(M, scale=field.scale(), field=field)
    block = {
        "eigen": _eigen_dict(e),
        "emp_eigenvalues": [float(v) for v in M.eigenvalues],
        "trace": M.trace,
        "subdifferential": [cls.lo, cls.hi],
        "classification": cls.label,
        "critical": cls.critical,
        "trace_zero": cls.trace_zero,
        "zero_matrix": cls.zero_matrix,
        "strict_saddle_pair": cls.strict_saddle_pair,
        "volume_preserving_componentwise": cls.volume_preserving,
    }
    return e, M, block


def run_experiment(cfg):
    """Dispatch one validated config to the libraries."""
    base = {"config": config_to_dict(cfg)}
    if cfg.mode == "spectrum":
        base["spectrum"] = [_eigen_dict(e) for e in enumerate_spectrum(cfg.domain, cfg.count)]
        return Artifacts(cfg.name, base)

    field = cfg.deformation()
    if cfg.mode == "emp":
        base["eigenvalues"] = [_emp_block(cfg, field, s)[2] for s in cfg.eigen]
        return Artifacts(cfg.name, base)

    branches = mps_mod.branch_sweep(cfg.domain, field, cfg.mps)
    base["diagnostics"] = branches.diagnostics
    if cfg.mode == "branches":
        return Artifacts(cfg.name, base, branches)

    blocks, columns, tangents = [], set(), []
    for sel in cfg.eigen:
        e, M, block = _emp_block(cfg, field, sel)
        lo, hi = e.index, e.index + e.multiplicity
        if hi <= branches.count:
            columns.update(range(lo, hi))
            tangents += [(e.value, float(s)) for s in M.eigenvalues]
        try:
            sl = mps_mod.slopes_at_zero(branches, e)
        except (mps_mod.WindowConflict, ValueError) as exc:
            block["slope_error"] = str(exc)
            blocks.append(block)
            continue
        res = max(match_residual(sl.right, M.eigenvalues), match_residual(sl.left, M.eigenvalues))
        block.update({
            "right_slopes": [float(v) for v in sl.right],
            "left_slopes": [float(v) for v in sl.left],
            "match_residual": res,
            "match": res < SLOPE_REL_TOL,
            "window_gap": _num(sl.gap),
            "window_movement": sl.movement,
        })
        blocks.append(block)
    base["eigenvalues"] = blocks
    return Artifacts(cfg.name, base, branches, sorted(columns) or None, tangents)


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return _num(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_branches_csv(branches, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        count = 0 if branches is None else branches.count
        w.writerow(["t"] + [f"lambda_{j}" for j in range(count)])
        if branches is None:
            return
        for t, row in zip(branches.t, branches.values):
            w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])


def write_outputs(art, out_dir):
    """Write <name>.json, plus <name>.csv and <name>.svg when branches exist."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    p = os.path.join(out_dir, f"{art.name}.json")
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_sanitize(art.report), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    paths.append(p)
    if art.branches is not None:
        p = os.path.join(out_dir, f"{art.name}.csv")
        write_branches_csv(art.branches, p)
        paths.append(p)
        p = os.path.join(out_dir, f"{art.name}.svg")
        render_plot_svg(art.branches, art.tangents or None, p, art.plot_columns, art.name)
        paths.append(p)
    return paths


def build_parser():
    ap = argparse.ArgumentParser(prog="steklov", description="Steklov eigenvalue perturbation experiments")
    ap.add_argument("mode", choices=MODES)
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON experiment config")
    src.add_argument("--preset", choices=PRESETS, help="named figure reproduction")
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.preset:
            configs = [replace(c, mode=args.mode) for c in preset(args.preset)]
        else:
            with open(args.config, encoding="utf-8") as fh:
                cfg = parse_config(fh.read())
            configs = [replace(cfg, mode=args.mode)]
        for c in configs:
            if c.mode in ("emp", "compare") and not c.eigen:
                raise ConfigError("eigen", f"mode {c.mode!r} needs eigenvalue selectors")
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        for c in configs:
            for p in write_outputs(run_experiment(c), args.out_dir):
                print(p)
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 2
    except (mps_mod.MpsError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
