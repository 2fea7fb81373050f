"""Command line entry point: single runs from a config file, or verification suites."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import suites
from .config import build_case, parse_config
from .errors import ConfigError, KineticError
from .transport import run

log = logging.getLogger("tpgkin")

SUITES = ("appendix-a", "verify-entropy", "verify-transport", "verify-euler")


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _write_manifest(out: Path, payload: dict):
    out.mkdir(parents=True, exist_ok=True)
    payload = {"version": _version(), "python": platform.python_version(),
               "numpy": np.__version__, **payload}
    (out / "manifest.json").write_text(json.dumps(payload, indent=2, default=str))


def _transport_report(out: Path, results: dict, kn: float):
    rows = []
    for model, (cou, fou, Pr) in results.items():
        rows.append((model, "couette", kn, cou.predicted, cou.measured, cou.ratio))
        rows.append((model, "fourier", kn, fou.predicted, fou.measured, fou.ratio))
        pred_pr = 1.0 if model == "bgk" else 1.5
        rows.append((model, "prandtl", kn, pred_pr, Pr, Pr / pred_pr))
    with open(out / "transport.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("model", "case", "Kn", "predicted", "measured", "ratio"))
        w.writerows(rows)


def run_suite(name: str, output_dir, quick=False):
    """Run one suite, write ``report.json`` and return ``(exit_status, checks)``."""
    out = Path(output_dir) / name
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    extra = {}
    if name == "appendix-a":
        checks = suites.appendix_a()
        extra["informational"] = [c.as_dict() for c in suites.appendix_a(span=8.0)]
    elif name == "verify-entropy":
        steps = 100 if quick else 1000
        checks = (suites.conservation_and_entropy(n_steps=steps) + suites.equilibrium_checks()
                  + suites.bgk_analytic() + suites.entropy_algebra() + suites.vib_closed_form())
    elif name == "verify-transport":
        kw = dict(n_cells=40, n_v=24, kn=0.0125) if quick else {}
        checks, results = suites.transport_coefficients(**kw)
        checks += suites.fp_eigen()
        _transport_report(out, results, kw.get("kn", 0.005))
    elif name == "verify-euler":
        checks, errs = suites.euler_limit(n_cells=100 if quick else 200)
        extra["L1_rho"] = errs
    else:
        raise ConfigError(f"unknown suite {name!r}; expected one of {SUITES}", "--suite")
    for c in checks:
        print(c.line())
    failed = [c.name for c in checks if not c.passed]
    report = {"suite": name, "passed": not failed, "failed": failed,
              "checks": [c.as_dict() for c in checks], "wall_clock": time.perf_counter() - t0,
              **extra}
    (out / "report.json").write_text(json.dumps(report, indent=2, default=str))
    _write_manifest(out, {"suite": name, "results": report["passed"], "failed": failed,
                          "wall_clock": report["wall_clock"], "quick": quick})
    if failed:
        print(f"suite {name} FAILED: {', '.join(failed)}", file=sys.stderr)
    return (1 if failed else 0), checks


def build_parser():
    p = argparse.ArgumentParser(prog="tpgkin",
                                description="Reduced kinetic solver for polyatomic gases.")
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--output-dir", default=None, help="output directory")
    p.add_argument("--case", choices=("relax", "couette", "fourier", "sod", "custom"))
    p.add_argument("--model", choices=("bgk", "fp"))
    p.add_argument("--kn", type=float, help="Knudsen number")
    p.add_argument("--snapshots", type=int, help="number of evenly spaced snapshots")
    p.add_argument("--seed", type=int, help="seed for randomized initial data")
    p.add_argument("--suite", choices=SUITES, help="run a verification suite instead")
    p.add_argument("--quick", action="store_true", help="reduced-size suite runs")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.suite:
            status, _ = run_suite(args.suite, args.output_dir or "output", args.quick)
            return status
        overrides = {"case.name": args.case, "case.model": args.model, "case.kn": args.kn,
                     "output.snapshots": args.snapshots, "case.seed": args.seed,
                     "output.directory": args.output_dir}
        cfg = parse_config(args.config, overrides)
        out = Path(cfg["output.directory"])
        cfg.write_effective(out)
        setup = build_case(cfg, out)
        t0 = time.perf_counter()
        result = run(setup.run, setup.state)
        wall = time.perf_counter() - t0
        g = setup.run.grid
        sv = result.solver
        _write_manifest(out, {
            "config_hash": cfg.hash(), "case": cfg["case.name"], "model": cfg["case.model"],
            "seed": setup.seed, "wall_clock": wall, "steps": sv.n_steps,
            "grid": {"velocity": list(g.shape), "cells": setup.run.mesh.n_cells},
            "results": {"t_final": sv.t, "n_clipped": sv.n_clipped,
                        "snapshot_times": [t for t, _ in result.snapshots]},
        })
        print(f"{cfg['case.name']}: {sv.n_steps} steps to t={sv.t:.6g} "
              f"in {wall:.1f}s -> {out}")
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except KineticError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
