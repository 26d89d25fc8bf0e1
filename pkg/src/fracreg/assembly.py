"""Discrete realization of the nonlocal bilinear form and operator.

The form on node indicators is a symmetric weight table
    w(x, y) = A(x, y) * h^(2n) / |x - y|^(n + 2s)
for non-touching node pairs; touching pairs replace the geometric factor by the
exact two-cell integral (cellquad), which keeps the singular quadrature error
under control.  Interactions reaching past the truncation box enter through
the analytic tail coefficients T(x) and the constant exterior values carried
by grid functions:

    E(u, v) = sum_{x != y} w(x,y) (u(x)-u(y)) (v(x)-v(y))
              + 2 h^n a_tail sum_x T(x) (u(x)-c_u) (v(x)-c_v),

    (L u)(x) = (2 / h^n) sum_{y != x} w(x,y) (u(x)-u(y))
               + 2 a_tail T(x) (u(x) - c_u),

so the duality (L u, v)_h = E(u, v) holds exactly for v with zero exterior.
On a torus the weights use minimal-image displacements and there is no tail.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from . import cellquad
from .grids import Domain, Grid, GridError, GridFunction
from .kernels import KernelCoefficient, DataKernel


class ConfigurationError(ValueError):
    pass


# -- cached geometric weight tables -------------------------------------------

_GEOM_CACHE: dict = {}


def _grid_key(grid: Grid) -> tuple:
    return (grid.dim, grid.counts, grid.spacing, grid.periodic)


def _axis_offsets(grid: Grid) -> list[np.ndarray]:
    """Per-axis displacement index arrays of the offset table."""
    if grid.periodic:
        return [((np.arange(m) + m // 2) % m) - m // 2 for m in grid.counts]
    return [np.arange(-(m - 1), m) for m in grid.counts]


def geometric_weight_table(grid: Grid, nu: float) -> np.ndarray:
    """Offset table of h^(2n)/|z|^nu with exact touching-cell corrections.

    Non-periodic tables are indexed by offset + (m - 1) per axis; torus tables
    are indexed by the wrapped offset directly (index 0 = zero displacement).
    Touching offsets whose exact integral diverges keep the midpoint weight.
    """
    key = (_grid_key(grid), float(nu))
    if key in _GEOM_CACHE:
        return _GEOM_CACHE[key]
    h = grid.spacing
    offs = _axis_offsets(grid)
    mesh = np.meshgrid(*offs, indexing="ij")
    dist2 = sum((o * h) ** 2 for o in mesh)
    with np.errstate(divide="ignore"):
        table = h ** (2 * grid.dim) * dist2 ** (-0.5 * nu)
    zero = tuple(np.nonzero(o == 0)[0][0] for o in offs)
    table[zero] = 0.0

    # touching offsets: ||z||_inf = h
    chebyshev = np.maximum.reduce([np.abs(o) for o in mesh])
    for idx in np.argwhere(chebyshev == 1):
        offset = tuple(offs[a][idx[a]] for a in range(grid.dim))
        if cellquad.touching_integral_converges(grid.dim, nu, offset):
            table[tuple(idx)] = cellquad.cell_pair_integral(
                offset, nu, grid.dim, spacing=h)

    table.setflags(write=False)
    _GEOM_CACHE[key] = table
    return table


_TAIL_CACHE: dict = {}


def tail_coefficients(grid: Grid, s: float) -> np.ndarray:
    key = (_grid_key(grid), float(s))
    if key not in _TAIL_CACHE:
        t = cellquad.exterior_tail_coefficients(grid, s)
        t.setflags(write=False)
        _TAIL_CACHE[key] = t
    return _TAIL_CACHE[key]


def _offset_gather_indices(grid: Grid, ix: np.ndarray, iy: np.ndarray) -> tuple:
    """Index arrays into the offset table for node-index pairs (ix, iy)."""
    idx = []
    for a in range(grid.dim):
        d = ix[..., a] - iy[..., a]
        if grid.periodic:
            idx.append(np.mod(d, grid.counts[a]))
        else:
            idx.append(d + grid.counts[a] - 1)
    return tuple(idx)


def _conv_same(table: np.ndarray, arr: np.ndarray, grid: Grid) -> np.ndarray:
    """sum_y table[x - y] arr[y] for every node x."""
    if grid.periodic:
        axes = tuple(range(grid.dim))
        return np.fft.irfftn(
            np.fft.rfftn(table, axes=axes) * np.fft.rfftn(arr, axes=axes),
            s=grid.counts, axes=axes)
    return fftconvolve(table, arr, mode="valid")


# -- the form ------------------------------------------------------------------

@dataclass(eq=False)
class NonlocalForm:
    """Symmetric weight table realizing the discrete bilinear form.

    For translation-invariant kernels the weights live in a per-offset table
    (O(N) storage); general kernels keep only the geometric table and evaluate
    kernel values on the fly in chunks (O(N^2) work per application).
    `elliptic` marks forms built from a kernel coefficient, for which the
    elementwise band lambda^-1 w0 <= w <= lambda w0 holds; data-kernel forms
    share the machinery but carry sign-indefinite weights.
    """

    grid: Grid
    s: float
    kernel: KernelCoefficient
    elliptic: bool = True
    _offset_weights: np.ndarray | None = field(default=None, repr=False)
    _row_sums: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.nu = self.grid.dim + 2.0 * self.s
        if self.kernel.translation_invariant_kind:
            geom = geometric_weight_table(self.grid, self.nu)
            offs = _axis_offsets(self.grid)
            mesh = np.meshgrid(*offs, indexing="ij")
            disp = np.stack([o * self.grid.spacing for o in mesh], axis=-1)
            avals = self.kernel.profile_at(disp)
            w = avals * geom
            if self.grid.periodic:
                # half-period offsets on even tori have two displacement
                # representatives; average them so the pair matrix stays
                # symmetric for any even profile
                rev = tuple((-np.arange(m)) % m for m in self.grid.counts)
                w = 0.5 * (w + w[np.ix_(*rev)])
            zero = tuple(np.nonzero(o == 0)[0][0] for o in offs)
            w[zero] = 0.0
            w.setflags(write=False)
            self._offset_weights = w

    # -- structural accessors ---------------------------------------------

    @property
    def translation_invariant(self) -> bool:
        return self.kernel.translation_invariant_kind

    @property
    def periodic(self) -> bool:
        return self.grid.periodic

    def offset_weight_table(self) -> np.ndarray:
        if self._offset_weights is None:
            raise ConfigurationError("form has no per-offset table "
                                     "(general kernel)")
        return self._offset_weights

    def geometric_table(self) -> np.ndarray:
        return geometric_weight_table(self.grid, self.nu)

    def tail_field(self) -> np.ndarray:
        """Kernel-weighted exterior tail coefficient a_tail * T(x)."""
        if self.periodic:
            return np.zeros(self.grid.shape)
        return self.kernel.tail_value * tail_coefficients(self.grid, self.s)

    def pair_weights(self, ix: np.ndarray, iy: np.ndarray) -> np.ndarray:
        """w(x, y) for node multi-index arrays of shape (..., dim)."""
        ix = np.asarray(ix)
        iy = np.asarray(iy)
        gather = _offset_gather_indices(self.grid, ix, iy)
        if self._offset_weights is not None:
            return self._offset_weights[gather]
        geom = self.geometric_table()[gather]
        nodes = self.grid.nodes().reshape(self.grid.shape + (self.grid.dim,))
        x = nodes[tuple(ix[..., a] for a in range(self.grid.dim))]
        y = nodes[tuple(iy[..., a] for a in range(self.grid.dim))]
        return self.kernel.pair_values(x, y) * geom

    def row_sums(self) -> np.ndarray:
        """S(x) = sum over in-box y of w(x, y), used for diagonals."""
        if self._row_sums is None:
            ones = np.ones(self.grid.shape)
            if self._offset_weights is not None:
                self._row_sums = _conv_same(self._offset_weights, ones, self.grid)
            else:
                self._row_sums = self._apply_general(ones, row_sums_only=True)
        return self._row_sums

    # -- general-kernel chunked kernel x geometry product -------------------

    def _apply_general(self, uvals: np.ndarray, row_sums_only: bool = False,
                       chunk: int = 256) -> np.ndarray:
        """sum_y w(x, y) u(y) (or sum_y w(x, y)) for general kernels."""
        grid = self.grid
        n = grid.n_nodes
        nodes = grid.nodes()
        multi = np.stack(np.meshgrid(
            *[np.arange(m) for m in grid.counts], indexing="ij"),
            axis=-1).reshape(n, grid.dim)
        geom = self.geometric_table()
        u_flat = uvals.ravel()
        out = np.empty(n)
        for lo in range(0, n, chunk):
            hi = min(lo + chunk, n)
            ix = multi[lo:hi, None, :]
            iy = multi[None, :, :]
            gather = _offset_gather_indices(grid, ix, iy)
            w = self.kernel.pair_values(
                nodes[lo:hi, None, :], nodes[None, :, :]) * geom[gather]
            out[lo:hi] = w.sum(axis=1) if row_sums_only else w @ u_flat
        return out.reshape(grid.shape)


def assemble_form(kernel: KernelCoefficient, grid: Grid, s: float,
                  elliptic: bool = True) -> NonlocalForm:
    """Build the discrete form for kernel coefficient A at order s."""
    if not 0.0 < s < 1.0:
        raise ConfigurationError(f"s must lie in (0, 1), got {s}")
    if grid.dim <= 2.0 * s:
        raise ConfigurationError(
            f"need n > 2s, got n={grid.dim}, s={s}")
    return NonlocalForm(grid=grid, s=s, kernel=kernel, elliptic=elliptic)


def assemble_data_forms(data_kernel: DataKernel, grid: Grid,
                        s: float) -> list[NonlocalForm]:
    """One (non-elliptic) form per data kernel component D_i."""
    return [assemble_form(data_kernel.component(i), grid, s, elliptic=False)
            for i in range(data_kernel.m)]


# -- operations ----------------------------------------------------------------

def node_inner(u: GridFunction, v: GridFunction, region: Domain | None = None) -> float:
    """Discrete L^2 pairing h^n sum u v (over the region mask if given)."""
    prod = u.values * v.values
    if region is not None:
        prod = prod[region.mask]
    return float(u.grid.cell_volume * prod.sum())


def apply_operator(form: NonlocalForm, u: GridFunction,
                   region: Domain | None = None) -> GridFunction:
    """(L_A u)(x) on every node of `region` (whole box by default)."""
    grid = form.grid
    if not grid.compatible_with(u.grid):
        raise GridError("grid function lives on a different grid")
    if region is not None and not grid.compatible_with(region.grid):
        raise GridError("region lives on a different grid")
    hn = grid.cell_volume
    if form._offset_weights is not None:
        conv = _conv_same(form._offset_weights, u.values, grid)
        srow = form.row_sums()
    else:
        conv = form._apply_general(u.values)
        srow = form.row_sums()
    out = (2.0 / hn) * (u.values * srow - conv)
    if not grid.periodic:
        out = out + 2.0 * form.tail_field() * (u.values - u.exterior)
    if region is not None:
        out = np.where(region.mask, out, 0.0)
    return GridFunction(grid, out, exterior=0.0)


def bilinear(form: NonlocalForm, u: GridFunction, v: GridFunction,
             chunk: int = 256) -> float:
    """E_A(u, v) by direct double summation over ordered node pairs.

    Kept independent of apply_operator's convolution path on purpose: the
    duality (L u, v)_h = E(u, v) is a genuine cross-check between the two.
    """
    grid = form.grid
    if not (grid.compatible_with(u.grid) and grid.compatible_with(v.grid)):
        raise GridError("mismatched grids")
    n = grid.n_nodes
    multi = np.stack(np.meshgrid(
        *[np.arange(m) for m in grid.counts], indexing="ij"),
        axis=-1).reshape(n, grid.dim)
    uf = u.values.ravel()
    vf = v.values.ravel()
    total = 0.0
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        w = form.pair_weights(multi[lo:hi, None, :], multi[None, :, :])
        du = uf[lo:hi, None] - uf[None, :]
        dv = vf[lo:hi, None] - vf[None, :]
        total += float(np.sum(w * du * dv))
    if not grid.periodic:
        tail = form.tail_field()
        total += 2.0 * grid.cell_volume * float(
            np.sum(tail * (u.values - u.exterior) * (v.values - v.exterior)))
    return total


def s_gradient(u: GridFunction, grid: Grid, s: float,
               integration_region: Domain | None = None) -> GridFunction:
    """Pointwise s-gradient: the square root of the Gagliardo energy density.

    With `integration_region` the y-integration is restricted to that region
    (plus the exterior tail if the region is marked unbounded); otherwise y
    runs over the whole space via the box quadrature plus the analytic tail.
    """
    if not grid.compatible_with(u.grid):
        raise GridError("grid function lives on a different grid")
    nu = grid.dim + 2.0 * s
    geom = geometric_weight_table(grid, nu)
    hn = grid.cell_volume
    if integration_region is None:
        chi = np.ones(grid.shape)
        with_tail = not grid.periodic
    else:
        if not grid.compatible_with(integration_region.grid):
            raise GridError("region lives on a different grid")
        chi = integration_region.mask.astype(float)
        with_tail = integration_region.unbounded and not grid.periodic
    # differences are shift invariant; centering the values keeps the
    # convolution cancellation benign (constant u comes out exactly zero)
    v = u.values - u.values.mean()
    vchi = v * chi
    v2chi = v ** 2 * chi
    schi = _conv_same(geom, chi, grid)
    cross = _conv_same(geom, vchi, grid)
    square = _conv_same(geom, v2chi, grid)
    energy = (v ** 2 * schi - 2.0 * v * cross + square) / hn
    if with_tail:
        energy = energy + tail_coefficients(grid, s) * (u.values - u.exterior) ** 2
    return GridFunction(grid, np.sqrt(np.maximum(energy, 0.0)), exterior=0.0)


def tail_integral(u: GridFunction, r: float, s: float) -> float:
    """integral of u(y)^2 / |y|^(n+2s) over R^n \\ B_r.

    Box-node quadrature out to the grid's tail radius, then the closed-form
    kernel tail times the squared exterior constant.  Cells straddling the
    radii get the radial overlap fraction as weight, which removes the O(h)
    boundary bias of the plain midpoint rule.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    grid = u.grid
    if grid.periodic:
        raise GridError("tail integral is undefined on a torus")
    h = grid.spacing
    rho = grid.radius_field()
    rcut = grid.tail_radius
    inner = np.clip((rho + 0.5 * h - r) / h, 0.0, 1.0)
    outer = np.clip((rcut - rho + 0.5 * h) / h, 0.0, 1.0)
    frac = inner * outer
    mask = frac > 0.0
    with np.errstate(divide="ignore"):
        dens = rho ** (-(grid.dim + 2.0 * s))
    quad = grid.cell_volume * float(
        np.sum(u.values[mask] ** 2 * dens[mask] * frac[mask]))
    analytic = u.exterior ** 2 * cellquad.tail_constant(
        grid.dim, s, max(r, rcut))
    return quad + analytic


def plane_wave(grid: Grid, freq, phase: str = "cos") -> GridFunction:
    """cos- or sin-wave with torus frequency vector `freq` (integers)."""
    freq = np.atleast_1d(np.asarray(freq, dtype=float))
    xi = 2.0 * np.pi * freq / grid.period
    arg = sum(xi[a] * grid.coords()[a] for a in range(grid.dim))
    vals = np.cos(arg) if phase == "cos" else np.sin(arg)
    return GridFunction(grid, vals)


def spectral_symbol(form: NonlocalForm, freq) -> float:
    """Exact eigenvalue of the discrete operator on the torus plane wave.

    lambda(xi) = (2 / h^n) sum_{z != 0} w(z) (1 - cos(xi . z)) over all torus
    offsets; apply_operator on cos(xi . x) equals lambda(xi) cos(xi . x).
    """
    if not form.translation_invariant:
        raise ConfigurationError("spectral symbol needs a translation-"
                                 "invariant kernel")
    if not form.periodic:
        raise ConfigurationError("spectral symbol needs a periodic torus grid")
    grid = form.grid
    freq = np.atleast_1d(np.asarray(freq, dtype=float))
    xi = 2.0 * np.pi * freq / grid.period
    offs = _axis_offsets(grid)
    mesh = np.meshgrid(*offs, indexing="ij")
    arg = sum(xi[a] * mesh[a] * grid.spacing for a in range(grid.dim))
    w = form.offset_weight_table()
    return float(2.0 / grid.cell_volume * np.sum(w * (1.0 - np.cos(arg))))
