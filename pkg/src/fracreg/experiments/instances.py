"""Seeded kernels, data fields and geometry for the verification experiments.

Random data is generated from coarse-scale tables that depend only on the
seed, never on the grid spacing, so a refinement study refines the
discretization and not the data.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..grids import Domain, Grid, GridFunction, build_ball_domain
from .params import ExperimentParams


def experiment_grid(params: ExperimentParams, h: float) -> Grid:
    return Grid.box(params.dim, h, params.box_radius)


def torus_grid(params: ExperimentParams, h: float) -> Grid:
    count = int(round(2.0 * params.box_radius / h))
    return Grid.torus(params.dim, h, count)


def ball(grid: Grid, radius: float, center=None) -> Domain:
    c = center if center is not None else [0.0] * grid.dim
    return build_ball_domain(grid, c, radius)


def rough_ti_kernel(params: ExperimentParams, seed: int) -> kernels.KernelCoefficient:
    return kernels.rough_kernel(lam=params.lam, seed=seed,
                                cell=params.kernel_cell,
                                extent=2.0 * params.box_radius + 2.0,
                                dim=params.dim)


def data_kernel(params: ExperimentParams, seed: int) -> kernels.DataKernel:
    return kernels.rough_data_kernel(big_lambda=params.big_lambda,
                                     m=params.m_data, seed=seed + 77,
                                     cell=params.kernel_cell,
                                     extent=2.0 * params.box_radius + 2.0,
                                     dim=params.dim)


def piecewise_field(grid: Grid, seed: int, amplitude: float = 1.0,
                    cell: float = 0.5, support: Domain | None = None
                    ) -> GridFunction:
    """Rough right-hand side: seeded piecewise-constant values on a coarse
    lattice of the given cell size (values in [-amplitude, amplitude])."""
    extent = grid.period / 2.0 if grid.periodic else grid.node_extent
    half = int(np.ceil(extent / cell)) + 1
    rng = np.random.default_rng(seed)
    table = rng.uniform(-amplitude, amplitude, size=(2 * half + 1,) * grid.dim)
    coords = grid.coords()
    idx = tuple(
        np.clip((np.sign(c) * np.floor(np.abs(c) / cell + 0.5)).astype(int),
                -half, half) + half
        for c in coords)
    vals = table[idx]
    if support is not None:
        vals = np.where(support.mask, vals, 0.0)
    return GridFunction(grid, vals, exterior=0.0)


def bump_field(grid: Grid, seed: int, amplitude: float = 1.0,
               center_spacing: float = 1.0, width: float = 0.5,
               margin: float = 1.0) -> GridFunction:
    """Smooth field: seeded Gaussian bumps on a fixed coarse center lattice."""
    extent = grid.period / 2.0 if grid.periodic else grid.node_extent
    reach = extent - margin
    n_half = max(int(np.floor(reach / center_spacing)), 0)
    centers_1d = np.arange(-n_half, n_half + 1) * center_spacing
    rng = np.random.default_rng(seed)
    coords = grid.coords()
    vals = np.zeros(grid.shape)
    if grid.dim == 1:
        coeffs = rng.uniform(-amplitude, amplitude, size=centers_1d.size)
        for c, a in zip(centers_1d, coeffs):
            d = coords[0] - c
            if grid.periodic:
                d = grid.wrap_displacement(d)
            vals += a * np.exp(-0.5 * (d / width) ** 2)
    else:
        coeffs = rng.uniform(-amplitude, amplitude,
                             size=(centers_1d.size, centers_1d.size))
        for i, cx in enumerate(centers_1d):
            for j, cy in enumerate(centers_1d):
                dx = coords[0] - cx
                dy = coords[1] - cy
                if grid.periodic:
                    dx = grid.wrap_displacement(dx)
                    dy = grid.wrap_displacement(dy)
                vals += coeffs[i, j] * np.exp(-0.5 * ((dx / width) ** 2
                                                      + (dy / width) ** 2))
    return GridFunction(grid, vals, exterior=0.0)
