"""Desk-scale numerical verification of nonlocal elliptic regularity estimates.

The package discretizes symmetric nonlocal operators with singular kernels on
uniform grids, solves the associated Dirichlet problems by the energy method,
and measures the real-variable quantities (maximal functions, level sets,
fractional seminorms) behind the quantitative estimates it verifies.
"""

from .grids import Domain, Grid, GridFunction, build_ball_domain, \
    full_box_domain, mean_over, measure
from .kernels import DataKernel, KernelCoefficient, eval_kernel, \
    verify_kernel_class
from .assembly import (NonlocalForm, apply_operator, assemble_form, bilinear,
                       node_inner, plane_wave, s_gradient, spectral_symbol,
                       tail_integral)
from .solver import (SolveResult, energy_estimate_ratio, sobolev_quotient,
                     solve_dirichlet)

__version__ = "0.1.0"

__all__ = [
    "Domain", "Grid", "GridFunction", "build_ball_domain", "full_box_domain",
    "mean_over", "measure", "DataKernel", "KernelCoefficient", "eval_kernel",
    "verify_kernel_class", "NonlocalForm", "apply_operator", "assemble_form",
    "bilinear", "node_inner", "plane_wave", "s_gradient", "spectral_symbol",
    "tail_integral", "SolveResult", "energy_estimate_ratio",
    "sobolev_quotient", "solve_dirichlet",
]
