"""Run-configuration files: TOML (key = value with nested blocks).

A config bundles grid, kernel, domain, data fields and experiment parameters;
builders here turn the parsed blocks into package objects and validate the
joint constraints (n > 2s in particular).
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import kernels
from .assembly import ConfigurationError
from .experiments.params import ExperimentParams
from .grids import Domain, Grid, GridFunction, build_ball_domain, full_box_domain
from .experiments import instances as _inst


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def build_grid(cfg: dict) -> Grid:
    block = cfg.get("grid")
    if block is None:
        raise ConfigurationError("config needs a [grid] block")
    dim = int(block.get("dim", 1))
    h = float(block.get("h", block.get("spacing", 0.0)))
    if h <= 0:
        raise ConfigurationError("[grid] needs h > 0")
    if block.get("periodic", False):
        count = int(block.get("count", round(2 * float(block["box_radius"]) / h)))
        return Grid.torus(dim, h, count)
    return Grid.box(dim, h, float(block["box_radius"]))


def order_parameter(cfg: dict) -> float:
    s = float(cfg.get("data", {}).get("s", cfg.get("experiment", {}).get("s", 0.25)))
    if not 0.0 < s < 1.0:
        raise ConfigurationError("s must lie in (0, 1)")
    return s


def build_kernel(cfg: dict, dim: int) -> kernels.KernelCoefficient:
    block = cfg.get("kernel", {"kind": "constant"})
    kind = block.get("kind", "constant")
    lam = float(block.get("lambda", block.get("lam", 2.0)))
    seed = int(block.get("seed", 0))
    if kind == "constant":
        return kernels.constant_kernel(float(block.get("value", 1.0)))
    if kind == "oscillatory":
        return kernels.oscillatory_kernel(
            lam, frequency=float(block.get("frequency", np.pi)))
    if kind == "rough":
        return kernels.rough_kernel(
            lam, seed=seed, cell=float(block.get("cell", 0.5)),
            extent=float(block.get("extent", 18.0)), dim=dim)
    if kind == "checkerboard":
        return kernels.checkerboard_kernel()
    raise ConfigurationError(f"unknown kernel kind {kind!r}")


def build_domain(cfg: dict, grid: Grid) -> Domain:
    block = cfg.get("domain")
    if block is None:
        return full_box_domain(grid)
    balls = block.get("balls", [])
    if not balls:
        raise ConfigurationError("[domain] needs at least one ball entry")
    dom = None
    for entry in balls:
        bd = build_ball_domain(grid, entry["center"], float(entry["radius"]))
        dom = bd if dom is None else dom | bd
    return dom


def build_field(spec, grid: Grid) -> GridFunction:
    """Field spec: a number (constant) or a table with a `kind` key."""
    if spec is None:
        return GridFunction.zeros(grid)
    if isinstance(spec, (int, float)):
        return GridFunction.constant(grid, float(spec))
    kind = spec.get("kind", "zero")
    if kind == "zero":
        return GridFunction.zeros(grid)
    if kind == "constant":
        return GridFunction.constant(grid, float(spec.get("value", 0.0)))
    if kind == "piecewise":
        return _inst.piecewise_field(
            grid, int(spec.get("seed", 0)),
            amplitude=float(spec.get("amplitude", 1.0)),
            cell=float(spec.get("cell", 0.5)))
    if kind == "bumps":
        return _inst.bump_field(
            grid, int(spec.get("seed", 0)),
            amplitude=float(spec.get("amplitude", 1.0)),
            width=float(spec.get("width", 0.5)))
    if kind == "indicator_ball":
        dom = build_ball_domain(grid, spec.get("center", [0.0] * grid.dim),
                                float(spec["radius"]))
        return GridFunction.indicator(dom)
    if kind == "csv":
        return GridFunction.from_csv(grid, spec["path"],
                                     exterior=float(spec.get("exterior", 0.0)))
    if kind == "binary":
        return GridFunction.from_binary(grid, spec["path"],
                                        exterior=float(spec.get("exterior", 0.0)))
    raise ConfigurationError(f"unknown field kind {kind!r}")


def build_data_kernel(cfg: dict, dim: int) -> kernels.DataKernel | None:
    block = cfg.get("data", {})
    g_specs = block.get("g", [])
    if not g_specs:
        return None
    return kernels.rough_data_kernel(
        big_lambda=float(block.get("big_lambda", 1.0)), m=len(g_specs),
        seed=int(block.get("data_seed", 0)),
        cell=float(block.get("data_cell", 0.5)),
        extent=18.0, dim=dim)


def build_params(cfg: dict, seed_override=None, workers_override=None
                 ) -> ExperimentParams:
    block = dict(cfg.get("experiment", {}))
    block.pop("name", None)
    grid_block = cfg.get("grid", {})
    block.setdefault("dim", int(grid_block.get("dim", 1)))
    if "box_radius" in grid_block:
        block.setdefault("box_radius", float(grid_block["box_radius"]))
    kern_block = cfg.get("kernel", {})
    if "lambda" in kern_block:
        block.setdefault("lam", float(kern_block["lambda"]))
    if seed_override is not None:
        block["seed"] = int(seed_override)
    if workers_override is not None:
        block["workers"] = int(workers_override)
    known = set(ExperimentParams.__dataclass_fields__)
    unknown = set(block) - known
    if unknown:
        raise ConfigurationError(f"unknown experiment parameters: {sorted(unknown)}")
    return ExperimentParams(**block)
