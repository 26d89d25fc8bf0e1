"""Command-line interface.

    fracreg solve|sgrad|maxfn|norms|levelsets --config cfg.toml [--out DIR]
    fracreg experiment NAME --config cfg.toml [--out DIR] [--workers K] [--seed N]

Exit code 0 iff every pass criterion of the run holds.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, config
from .assembly import s_gradient
from .experiments import EXPERIMENTS, run_experiment
from .grids import measure
from .solver import energy_estimate_ratio, solve_dirichlet


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _load_field(cfg: dict, grid):
    block = cfg.get("field")
    if block is None:
        raise config.ConfigurationError(
            "this subcommand needs a [field] block (path or generator)")
    if "path" in block:
        kind = block.get("format", "csv")
        spec = {"kind": kind, "path": block["path"],
                "exterior": block.get("exterior", 0.0)}
        return config.build_field(spec, grid)
    return config.build_field(block, grid)


def cmd_solve(cfg: dict, out: Path) -> int:
    grid = config.build_grid(cfg)
    s = config.order_parameter(cfg)
    kern = config.build_kernel(cfg, grid.dim)
    omega = config.build_domain(cfg, grid)
    data = cfg.get("data", {})
    f = config.build_field(data.get("f"), grid)
    h_ext = config.build_field(data.get("h_ext"), grid)
    b = config.build_field(data.get("b"), grid)
    dk = config.build_data_kernel(cfg, grid.dim)
    gs = [config.build_field(spec, grid) for spec in data.get("g", [])]
    res = solve_dirichlet(kern, omega, s, f=f, g=gs, data_kernel=dk,
                          h_ext=h_ext, b=b)
    out.mkdir(parents=True, exist_ok=True)
    res.u.to_csv(out / "solution.csv")
    res.u.to_binary(out / "solution.bin")
    diag = res.diagnostics()
    if float(np.max(np.abs(b.values))) == 0.0:
        diag["energy_ratio"] = energy_estimate_ratio(
            res.u, h_ext, gs, f, omega, s)
    else:
        diag["energy_ratio"] = None
    _write_json(out / "diagnostics.json", {"schema": 1, **diag})
    print(f"solved: {res.unknowns} unknowns, {res.iterations} iterations, "
          f"residual {res.residual:.3e}")
    return 0


def cmd_sgrad(cfg: dict, out: Path) -> int:
    grid = config.build_grid(cfg)
    s = config.order_parameter(cfg)
    u = _load_field(cfg, grid)
    grad = s_gradient(u, grid, s)
    out.mkdir(parents=True, exist_ok=True)
    grad.to_csv(out / "sgradient.csv")
    _write_json(out / "sgradient.json", {
        "schema": 1, "s": s, "max": float(grad.values.max()),
        "l2_box": float(np.sqrt(grid.cell_volume * np.sum(grad.values ** 2)))})
    return 0


def cmd_maxfn(cfg: dict, out: Path) -> int:
    grid = config.build_grid(cfg)
    u = _load_field(cfg, grid)
    omega = config.build_domain(cfg, grid)
    mf = analysis.maximal_function(u, omega)
    out.mkdir(parents=True, exist_ok=True)
    mf.to_csv(out / "maximal.csv")
    pointwise = bool(np.all(mf.values[omega.mask]
                            >= np.abs(u.values[omega.mask]) - 1e-12))
    _write_json(out / "maximal.json", {
        "schema": 1, "max": float(mf.values.max()),
        "pointwise_bound_holds": pointwise})
    return 0 if pointwise else 1


def cmd_norms(cfg: dict, out: Path) -> int:
    grid = config.build_grid(cfg)
    s = config.order_parameter(cfg)
    u = _load_field(cfg, grid)
    omega = config.build_domain(cfg, grid)
    block = cfg.get("norms", {})
    payload = {"schema": 1, "lp": {}, "measure": measure(omega)}
    for p in block.get("p", [2.0]):
        payload["lp"][f"{float(p):g}"] = analysis.lp_norm(
            u, analysis.NormSpec(float(p), omega))
    if block.get("slobodeckij", True):
        payload["slobodeckij_p2"] = analysis.slobodeckij_seminorm(
            u, omega, s, 2.0)
    _write_json(out / "norms.json", payload)
    return 0


def cmd_levelsets(cfg: dict, out: Path) -> int:
    grid = config.build_grid(cfg)
    u = _load_field(cfg, grid)
    omega = config.build_domain(cfg, grid)
    block = cfg.get("levelsets", {})
    prof = analysis.level_set_sum(
        u, omega, float(block.get("tau", 1.0)), float(block.get("beta", 2.0)),
        float(block.get("p", 3.0)))
    _write_json(out / "levelsets.json", {
        "schema": 1, "tau": prof.tau, "beta": prof.beta, "p": prof.p,
        "measures": prof.measures, "sum_S": prof.sum_S,
        "lp_power": prof.lp_power, "constant": prof.constant,
        "sandwich_ok": prof.sandwich_ok})
    return 0 if prof.sandwich_ok else 1


def cmd_experiment(name: str, cfg: dict, out: Path, seed, workers) -> int:
    params = config.build_params(cfg, seed_override=seed,
                                 workers_override=workers)
    report = run_experiment(name, params)
    report.write(out)
    for crit in report.criteria:
        print(f"[{'PASS' if crit.passed else 'FAIL'}] {name}:{crit.name}"
              + (f" ({crit.details})" if crit.details else ""))
    return 0 if report.passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fracreg",
        description="nonlocal elliptic estimates, verified at desk scale")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "sgrad", "maxfn", "norms", "levelsets"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default="out")
    spe = sub.add_parser("experiment")
    spe.add_argument("name", choices=sorted(EXPERIMENTS))
    spe.add_argument("--config", required=True)
    spe.add_argument("--out", default="out")
    spe.add_argument("--workers", type=int, default=None)
    spe.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    cfg = config.load_config(args.config)
    out = Path(args.out)
    try:
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "sgrad":
            return cmd_sgrad(cfg, out)
        if args.command == "maxfn":
            return cmd_maxfn(cfg, out)
        if args.command == "norms":
            return cmd_norms(cfg, out)
        if args.command == "levelsets":
            return cmd_levelsets(cfg, out)
        workers = args.workers
        if workers is None:
            workers = int(cfg.get("experiment", {}).get(
                "workers", os.cpu_count() or 1))
        return cmd_experiment(args.name, cfg, out, args.seed, workers)
    except Exception as exc:  # surface config/solver errors as exit code 2
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
