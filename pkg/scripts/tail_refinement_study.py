#!/usr/bin/env python3
"""Refinement table for the closed-form checks: the kernel tail constant and
the explicit solution profile of the constant-kernel Dirichlet problem."""

import argparse

import numpy as np

from fracreg import kernels
from fracreg.assembly import tail_integral
from fracreg.cellquad import tail_constant
from fracreg.grids import Grid, GridFunction, build_ball_domain
from fracreg.solver import solve_dirichlet


def tail_table(dim, s, r, box_radius, spacings):
    exact = tail_constant(dim, s, r)
    print(f"tail integral over the complement of B_{r}, n={dim}, s={s} "
          f"(exact {exact:.6f}):")
    for h in spacings:
        grid = Grid.box(dim, h, box_radius)
        got = tail_integral(GridFunction.constant(grid, 1.0), r, s)
        print(f"  h = {h:<10.5g} value = {got:.6f}   "
              f"rel err = {abs(got - exact) / exact:.3e}")


def profile_table(spacings):
    print("constant-kernel solve on B_1 with unit forcing, n=1, s=1/4,")
    print("correlation with the (1 - x^2)_+^(1/4) profile:")
    for h in spacings:
        grid = Grid.box(1, h, 4.0)
        omega = build_ball_domain(grid, [0.0], 1.0)
        f = GridFunction.constant(grid, 1.0)
        f.exterior = 0.0
        res = solve_dirichlet(kernels.constant_kernel(), omega, 0.25, f=f)
        x = grid.axis_coords(0)
        shape = np.where(np.abs(x) < 1, (1 - np.minimum(x ** 2, 1)) ** 0.25, 0)
        corr = np.corrcoef(res.u.values[omega.mask], shape[omega.mask])[0, 1]
        print(f"  h = {h:<10.5g} corr = {corr:.6f}   "
              f"iters = {res.iterations}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--box-radius", type=float, default=32.0)
    args = ap.parse_args()
    tail_table(2, 0.5, 1.0, args.box_radius, (1 / 8, 1 / 16, 1 / 32))
    tail_table(1, 0.25, 1.0, 8.0, (1 / 16, 1 / 32, 1 / 64))
    profile_table((1 / 16, 1 / 32, 1 / 64))


if __name__ == "__main__":
    main()
