"""Command line entry point: ``catalyx {validate,check-ls,simulate} --config PATH``.

Exit codes: 0 success; 1 validation or Lopatinskii-Shapiro failure;
2 malformed configuration; 3 degeneration; 4 Newton non-convergence;
5 norm growth.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig
from .diagnostics import CSV_COLUMNS, check_bounds, evaluate
from .network import (
    RankDeficiencyError,
    check_compatibility,
    conserved_basis,
    equilibrium_constants,
    validate_network,
)
from .symbol import ls_sweep
from .timestepper import advance

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2

log = logging.getLogger("catalyx")


def _network_checks(cfg: RunConfig) -> tuple[list, object]:
    violations = [v.to_dict() for v in validate_network(cfg.network, cfg.detailed_balance_tol)]
    try:
        basis = conserved_basis(cfg.network)
    except RankDeficiencyError:
        basis = None
    return violations, basis


def _compatibility(cfg: RunConfig, kappa, basis, state, bnd):
    return check_compatibility(cfg.network, kappa, state, cfg.compatibility_tol, bnd, basis,
                               cfg.solver.positivity_floor, grid_relative=cfg.flux_check == "grid")


def cmd_validate(cfg: RunConfig) -> tuple[int, dict]:
    violations, basis = _network_checks(cfg)
    report = {"network_violations": violations}
    if basis is not None:
        report["conserved_basis"] = basis.e.tolist()
        pos = basis.positive_combination
        report["positive_conserved"] = None if pos is None else np.asarray(pos).tolist()
        state, bnd = cfg.initial_state()
        comp = _compatibility(cfg, equilibrium_constants(cfg.network), basis, state, bnd)
        report["compatibility"] = comp.to_dict()
        clean = not violations and comp.ok
    else:
        clean = False
    report["ok"] = clean
    return (EXIT_OK if clean else EXIT_VIOLATION), report


def cmd_check_ls(cfg: RunConfig) -> tuple[int, dict]:
    violations, basis = _network_checks(cfg)
    if basis is None:
        return EXIT_VIOLATION, {"passed": False, "network_violations": violations}
    if cfg.c_star is not None:
        traces = np.atleast_2d(np.asarray(cfg.c_star, dtype=float))
    else:
        _, bnd = cfg.initial_state()
        traces = np.unique(bnd.values, axis=0)
    if np.any(traces <= 0):
        return EXIT_VIOLATION, {"passed": False, "error": "boundary trace is not strictly positive"}
    reports = []
    for c_star in traces:
        rep = ls_sweep(cfg.network, c_star, cfg.sector_phi, cfg.sample_plan, basis,
                       cfg.ls_margin, cfg.threads, seed=cfg.seed)
        reports.append((rep, c_star))
    worst, c_star = min(reports, key=lambda rc: rc[0].min_scaled_singular_value)
    out = worst.to_dict()
    out["c_star"] = c_star.tolist()
    out["n_traces"] = len(reports)
    out["passed"] = all(r.passed for r, _ in reports)
    return (EXIT_OK if out["passed"] else EXIT_VIOLATION), out


def cmd_simulate(cfg: RunConfig, warn_only_compatibility: bool = False) -> tuple[int, dict]:
    violations, basis = _network_checks(cfg)
    if violations or basis is None:
        return EXIT_VIOLATION, {"status": "Rejected", "network_violations": violations}
    kappa = equilibrium_constants(cfg.network)
    state, bnd = cfg.initial_state()
    comp = _compatibility(cfg, kappa, basis, state, bnd)
    # non-positive data is left to the run, which reports it as Degeneration
    blocking = [v for v in comp.violations if v.kind != "positivity"]
    if blocking and not warn_only_compatibility:
        return EXIT_VIOLATION, {"status": "Rejected", "compatibility": comp.to_dict()}
    if comp.violations:
        log.warning("initial data incompatible: %s", [v.message for v in comp.violations])

    out_dir = Path(cfg.output_dir) if cfg.output_dir else None
    writer = csv_file = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_file = open(out_dir / "diagnostics.csv", "w", newline="")
        writer = csv.writer(csv_file)
        writer.writerow(CSV_COLUMNS)

    def snapshot(step, t, c, b):
        if out_dir is None or not cfg.snapshot_every or step % cfg.snapshot_every:
            return
        doc = {
            "step": step,
            "t": t,
            "grid": cfg.grid.to_dict(),
            "species": list(cfg.network.species_names),
            "cells": np.asarray(c).tolist(),
            "boundary": np.asarray(b).tolist(),
        }
        (out_dir / f"snapshot_{step:06d}.json").write_text(json.dumps(doc))

    def on_step(step, t, c, b, rec):
        if writer is not None and rec is not None:
            writer.writerow(rec.csv_row())
        snapshot(step, t, c, b)

    try:
        if writer is not None:
            writer.writerow(evaluate(cfg.network, basis, cfg.grid, state, bnd, kappa, 0.0, 0,
                                     cfg.solver.positivity_floor).csv_row())
        snapshot(0, 0.0, state.c, bnd.values)
        result = advance(cfg.network, kappa, basis, cfg.grid, state, cfg.solver, bnd, on_step=on_step)
    finally:
        if csv_file is not None:
            csv_file.close()
    final = result.status.to_dict()
    final["steps"] = len(result.trajectory) - 1
    if len(result.trajectory) > 1:
        bounds = check_bounds(result.trajectory, basis, cfg.mass_tol)
        final["bounds"] = bounds.to_dict()
    return result.status.code, final


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catalyx", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("validate", "check network, conserved quantities and initial data"),
                        ("check-ls", "sweep the Lopatinskii-Shapiro boundary matrix"),
                        ("simulate", "run the implicit time integration")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--output", type=Path, default=None)
        p.add_argument("--snapshot-every", type=int, default=None)
        p.add_argument("--warn-only-compatibility", action="store_true")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("CATALYX_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        if args.threads is not None:
            cfg.threads = args.threads
        if args.output is not None:
            cfg.output_dir = str(args.output)
        if args.snapshot_every is not None:
            cfg.snapshot_every = args.snapshot_every
        if args.command == "validate":
            code, report = cmd_validate(cfg)
        elif args.command == "check-ls":
            code, report = cmd_check_ls(cfg)
        else:
            code, report = cmd_simulate(cfg, args.warn_only_compatibility)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc)}))
        return EXIT_CONFIG
    print(json.dumps(report, default=_json_default))
    return code


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


if __name__ == "__main__":
    sys.exit(main())
