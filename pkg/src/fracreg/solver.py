"""Energy-method solver for the weak Dirichlet problem.

Unknowns are the interior nodal values of w = u - h_ext (one indicator basis
function per node of Omega, zero outside); the reduced system

    h^n (L_A w)(x) + h^n b(x) w(x) = rhs(x),   x in Omega,

is symmetric positive definite for b >= 0 and solved by Jacobi-preconditioned
conjugate gradients.  The solution u = w + h_ext matches h_ext bit-exactly
outside Omega.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .assembly import (ConfigurationError, NonlocalForm, apply_operator,
                       assemble_data_forms, assemble_form, bilinear,
                       s_gradient)
from .grids import Domain, Grid, GridError, GridFunction, measure
from .kernels import DataKernel, KernelCoefficient


class SolverError(RuntimeError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass
class SolveResult:
    u: GridFunction
    iterations: int
    residual: float
    unknowns: int

    def diagnostics(self) -> dict:
        return {"iterations": self.iterations, "residual": self.residual,
                "unknowns": self.unknowns}


def _interior_matvec(form: NonlocalForm, omega: Domain, b_vals: np.ndarray):
    """Matvec w -> h^n (L_A w + b w) restricted to the omega unknowns."""
    grid = form.grid
    hn = grid.cell_volume
    mask = omega.mask

    def matvec(wflat):
        w = GridFunction.zeros(grid)
        w.values[mask] = wflat
        lw = apply_operator(form, w)
        return hn * (lw.values[mask] + b_vals[mask] * wflat)

    return matvec


def _system_diagonal(form: NonlocalForm, omega: Domain,
                     b_vals: np.ndarray) -> np.ndarray:
    grid = form.grid
    hn = grid.cell_volume
    diag = 2.0 * form.row_sums()
    if not grid.periodic:
        diag = diag + 2.0 * hn * form.tail_field()
    diag = diag + hn * b_vals
    return diag[omega.mask]


def solve_dirichlet(kernel: KernelCoefficient, omega: Domain, s: float,
                    f: GridFunction | None = None,
                    g: list[GridFunction] | None = None,
                    data_kernel: DataKernel | None = None,
                    h_ext: GridFunction | None = None,
                    b: GridFunction | None = None,
                    rtol: float = 1e-10,
                    x0: np.ndarray | None = None,
                    maxiter: int | None = None) -> SolveResult:
    """Solve L_A u + b u = sum_i L_{D_i} g_i + f in omega, u = h_ext outside.

    On a bounded (box) domain b must be nonnegative on omega; on a torus,
    where the box plays the role of the whole space, ess-inf b > 0 is
    required unless omega is a proper subset.
    """
    grid = omega.grid
    form = assemble_form(kernel, grid, s)

    f = f if f is not None else GridFunction.zeros(grid)
    h_ext = h_ext if h_ext is not None else GridFunction.zeros(grid)
    b = b if b is not None else GridFunction.zeros(grid)
    g = list(g) if g is not None else []
    for fld in (f, h_ext, b, *g):
        if not grid.compatible_with(fld.grid):
            raise GridError("data field lives on a different grid")
    if g and data_kernel is None:
        raise ConfigurationError("g fields were given without a data kernel")
    if data_kernel is not None and len(g) != data_kernel.m:
        raise ConfigurationError(
            f"{len(g)} g fields for a data kernel with m={data_kernel.m}")

    ess_inf_b = float(b.values[omega.mask].min()) if omega.node_count else 0.0
    full_torus = grid.periodic and omega.node_count == grid.n_nodes
    if full_torus:
        if ess_inf_b <= 0:
            raise ConfigurationError(
                "whole-torus problems need ess-inf b > 0")
    elif ess_inf_b < 0:
        raise ConfigurationError("bounded domains need ess-inf b >= 0")
    if not grid.periodic and np.any(omega.mask & grid.boundary_layer_mask()):
        raise GridError("omega reaches the truncation boundary layer")

    hn = grid.cell_volume
    mask = omega.mask

    # right-hand side: h^n [ sum_i L_{D_i} g_i + f - L_A h_ext - b h_ext ]
    rhs = f.values.copy()
    if data_kernel is not None:
        for dform, gi in zip(assemble_data_forms(data_kernel, grid, s), g):
            rhs += apply_operator(dform, gi).values
    rhs -= apply_operator(form, h_ext).values
    rhs -= b.values * h_ext.values
    rhs = hn * rhs[mask]

    n_unknowns = int(mask.sum())
    if n_unknowns == 0:
        raise ConfigurationError("omega has no nodes")
    matvec = _interior_matvec(form, omega, b.values)
    op = LinearOperator((n_unknowns, n_unknowns), matvec=matvec)
    diag = _system_diagonal(form, omega, b.values)
    precond = LinearOperator((n_unknowns, n_unknowns),
                             matvec=lambda r: r / diag)

    iters = 0

    def count(_):
        nonlocal iters
        iters += 1

    if maxiter is None:
        maxiter = int(50 * np.sqrt(n_unknowns)) + 1000
    wflat, info = cg(op, rhs, x0=x0, rtol=rtol, atol=0.0, maxiter=maxiter,
                     M=precond, callback=count)
    rhs_norm = float(np.linalg.norm(rhs))
    res = float(np.linalg.norm(rhs - matvec(wflat)))
    res_rel = res / rhs_norm if rhs_norm > 0 else res
    if info != 0:
        raise SolverError(
            f"conjugate gradient did not converge in {maxiter} iterations "
            f"(relative residual {res_rel:.3e})",
            residual=res_rel, iterations=iters)

    u = h_ext.copy()
    u.values[mask] = h_ext.values[mask] + wflat
    return SolveResult(u=u, iterations=iters, residual=res_rel,
                       unknowns=n_unknowns)


def energy_estimate_ratio(u: GridFunction, h_ext: GridFunction,
                          g: list[GridFunction], f: GridFunction,
                          omega: Domain, s: float) -> float:
    """Measured constant of the energy estimate for the Dirichlet problem:
    ||grad^s u||_L2(Omega) over the data norms.  The 0/0 case reports 0."""
    grid = omega.grid
    num = l2_region(s_gradient(u, grid, s), omega)
    den = l2_region(s_gradient(h_ext, grid, s), omega)
    den += sum(l2_region(s_gradient(gi, grid, s), omega) for gi in g)
    den += l2_region(f, omega)
    if den == 0.0:
        if num <= 1e-10 * max(1.0, abs(float(u.values.max()))):
            return 0.0
        raise SolverError(
            "energy estimate violated: zero data but nonzero solution energy")
    return num / den


def l2_region(u: GridFunction, region: Domain) -> float:
    return float(np.sqrt(region.grid.cell_volume
                         * np.sum(u.values[region.mask] ** 2)))


def sobolev_quotient(w: GridFunction, omega: Domain, s: float) -> float:
    """Measured constant of the fractional Sobolev inequality:
    ||w||_L2^2 / (|Omega|^(2s/n) * full-space Gagliardo energy of w)."""
    grid = omega.grid
    if np.any((~omega.mask) & (w.values != 0.0)) or w.exterior != 0.0:
        raise ConfigurationError("w must vanish outside omega")
    energy = bilinear(assemble_form(
        KernelCoefficient.translation_invariant(
            lambda z: np.ones(z.shape[:-1]), 1.0, name="constant"),
        grid, s), w, w)
    if energy <= 0.0:
        raise ConfigurationError("zero seminorm: w is constant")
    l2sq = grid.cell_volume * float(np.sum(w.values ** 2))
    return l2sq / (measure(omega) ** (2.0 * s / grid.dim) * energy)
