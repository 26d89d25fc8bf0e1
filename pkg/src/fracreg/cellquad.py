"""Singular quadrature helpers: exact cell-pair integrals and tail formulas.

The midpoint weight h^(2n)/|x-y|^nu is badly wrong for touching cells, so
nearest-neighbour interactions use the exact integral of |z-z'|^(-nu) over the
two node-centered cells.  For touching cells that integral only converges when
nu < n + c, where c is the number of nonzero coordinates of the offset (the
contact codimension): 1D neighbours and 2D edge-neighbours need nu < n + 1,
2D corner-neighbours need nu < n + 2.  Above those thresholds the indicator
basis falls out of the underlying fractional space and the divergence is
genuine; callers fall back to the midpoint weight there.

Everything is computed at unit spacing and rescaled by homogeneity,
I_h = h^(2n - nu) * I_1.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

#: surface area of the unit sphere S^(n-1)
SPHERE_AREA = {1: 2.0, 2: 2.0 * np.pi}


def tail_constant(dim: int, s: float, r: float) -> float:
    """The closed-form kernel tail: integral of |z|^(-n-2s) over R^n \\ B_r."""
    return SPHERE_AREA[dim] / (2.0 * s * r ** (2.0 * s))


def touching_integral_converges(dim: int, nu: float, offset) -> bool:
    """Whether the exact two-cell integral exists for a touching offset."""
    codim = int(np.count_nonzero(offset))
    return nu < dim + codim


# -- 1D ----------------------------------------------------------------------

def _power_int(a: float, b: float, expo: float) -> float:
    """integral of u^expo over [a, b] (expo != -1; a may be 0 when expo > -1)."""
    if a == 0.0:
        return b ** (expo + 1.0) / (expo + 1.0)
    return (b ** (expo + 1.0) - a ** (expo + 1.0)) / (expo + 1.0)


def cell_pair_integral_1d(offset: int, nu: float) -> float:
    """Exact integral of |z - z'|^(-nu) over unit cells centered at 0 and offset.

    Uses the tent-correlation form: I = integral (1 - |u - d|)_+ u^(-nu) du.
    """
    d = abs(int(offset))
    if d == 0:
        raise ValueError("cell-pair integral needs distinct cells")
    if d == 1 and nu >= 2.0:
        raise ValueError(f"touching 1D cell integral diverges for nu={nu} >= 2")
    if nu in (1.0, 2.0):
        raise NotImplementedError("logarithmic exponents not supported")
    left = _power_int(d - 1, d, 1.0 - nu) - (d - 1) * _power_int(d - 1, d, -nu)
    right = (d + 1) * _power_int(d, d + 1, -nu) - _power_int(d, d + 1, 1.0 - nu)
    return left + right


# -- 2D ----------------------------------------------------------------------

def _split_at_zero(lo: float, hi: float):
    """Subintervals of [lo, hi] that do not straddle 0 (tent kink location)."""
    if lo < 0.0 < hi:
        return [(lo, 0.0), (0.0, hi)]
    return [(lo, hi)]


def _gl_rect(x0, x1, y0, y1, fn, order=20):
    """Tensor Gauss-Legendre integral of fn(x, y) over one rectangle.

    The tent factors kink at coordinate 0, so panels are split there first.
    """
    t, w = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for a0, a1 in _split_at_zero(x0, x1):
        for b0, b1 in _split_at_zero(y0, y1):
            xs = 0.5 * (a1 - a0) * t + 0.5 * (a0 + a1)
            ys = 0.5 * (b1 - b0) * t + 0.5 * (b0 + b1)
            wx = 0.5 * (a1 - a0) * w
            wy = 0.5 * (b1 - b0) * w
            total += float(wx @ fn(xs[:, None], ys[None, :]) @ wy)
    return total


def _shell_rects(vstar, a_out, a_in):
    """Rectangles covering (Q(a_out) \\ Q(a_in)) inside [-1,1]^2, where Q(a)
    is the square of half-width a around the singular boundary point vstar."""
    vx, vy = vstar
    if vy == 0.0:  # edge midpoint (-1, 0)
        return [
            (vx + a_in, vx + a_out, -a_out, a_out),
            (vx, vx + a_in, a_in, a_out),
            (vx, vx + a_in, -a_out, -a_in),
        ]
    # corner (-1, -1)
    return [
        (vx + a_in, vx + a_out, vy, vy + a_out),
        (vx, vx + a_in, vy + a_in, vy + a_out),
    ]


def _base_rects(vstar):
    """[-1,1]^2 minus the half-width-1 square around vstar."""
    vx, vy = vstar
    if vy == 0.0:
        return [(0.0, 1.0, -1.0, 1.0)]
    return [(0.0, 1.0, -1.0, 1.0), (-1.0, 0.0, 0.0, 1.0)]


@lru_cache(maxsize=None)
def cell_pair_integral_2d(offset: tuple, nu: float, max_levels: int = 3000) -> float:
    """Exact integral of |z - z'|^(-nu) over unit cells centered at 0 and offset.

    Correlation form: I = integral over [-1,1]^2 of
    (1-|v1|)(1-|v2|) |zbar + v|^(-nu) dv, singular at v = -zbar on the boundary
    when the cells touch.  Dyadic shells shrink toward the singular point; the
    geometric tail of the shell sums is extrapolated once the ratio settles.
    """
    zx, zy = sorted(abs(int(c)) for c in offset)[::-1]
    if (zx, zy) == (0, 0):
        raise ValueError("cell-pair integral needs distinct cells")
    zbar = np.array([float(zx), float(zy)])

    def integrand(v1, v2):
        r2 = (zbar[0] + v1) ** 2 + (zbar[1] + v2) ** 2
        return (1.0 - np.abs(v1)) * (1.0 - np.abs(v2)) * r2 ** (-0.5 * nu)

    if max(zx, zy) > 1:  # cells do not touch, integrand is smooth
        return _gl_rect(-1.0, 1.0, -1.0, 1.0, integrand, order=40)
    if not touching_integral_converges(2, nu, (zx, zy)):
        raise ValueError(
            f"touching 2D cell integral diverges for offset {(zx, zy)}, nu={nu}")

    vstar = (-float(zx), -float(zy))
    total = sum(_gl_rect(*r, integrand) for r in _base_rects(vstar))

    shells = []
    a_out = 1.0
    for _ in range(max_levels):
        a_in = 0.5 * a_out
        s_j = sum(_gl_rect(*r, integrand) for r in _shell_rects(vstar, a_out, a_in))
        shells.append(s_j)
        total += s_j
        a_out = a_in
        if len(shells) >= 3 and shells[-1] < 1e-16 * abs(total):
            return total
        if len(shells) >= 12:
            q1 = shells[-1] / shells[-2]
            q2 = shells[-2] / shells[-3]
            if abs(q1 - q2) < 1e-9 and q1 < 1.0:
                # remaining shells form a geometric series to working accuracy
                return total + shells[-1] * q1 / (1.0 - q1)
    raise RuntimeError("cell-pair quadrature did not settle; nu too close to "
                       "the divergence threshold")


def cell_pair_integral(offset, nu: float, dim: int, spacing: float = 1.0) -> float:
    """Exact two-cell integral at spacing h, cells centered at 0 and offset*h."""
    if dim == 1:
        off = offset[0] if np.ndim(offset) else offset
        unit = cell_pair_integral_1d(int(off), nu)
    else:
        unit = cell_pair_integral_2d(tuple(int(c) for c in offset), nu)
    return spacing ** (2 * dim - nu) * unit


# -- exterior tail coefficients ------------------------------------------------

def _tail_coeff_1d(x: np.ndarray, radius: float, s: float) -> np.ndarray:
    """integral of |x-y|^(-1-2s) over |y| > radius, for |x| < radius (exact)."""
    return ((radius - x) ** (-2.0 * s) + (radius + x) ** (-2.0 * s)) / (2.0 * s)


def _tail_coeff_2d(rho: np.ndarray, radius: float, s: float,
                   n_radial: int = 64, n_angular: int = 128) -> np.ndarray:
    """integral of |x-y|^(-2-2s) over |y| > radius for |x| = rho < radius.

    After the substitution v = (radius/t)^(2s) the radial integral becomes
    (2 pi / (2 s radius^(2s))) * integral_0^1 G(v) dv with G smooth and
    G -> 1 as v -> 0, which Gauss-Legendre handles well; the angular integral
    of a smooth periodic function is done by the trapezoid rule.  At rho = 0
    this reproduces the closed form omega_2 / (2 s radius^(2s)) exactly.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    v, wv = np.polynomial.legendre.leggauss(n_radial)
    v = 0.5 * (v + 1.0)
    wv = 0.5 * wv
    t = radius * v ** (-1.0 / (2.0 * s))          # (n_radial,)
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    ct = np.cos(theta)                            # (n_angular,)

    # dist2: (n_rho, n_radial, n_angular)
    dist2 = (t[None, :, None] ** 2 + rho[:, None, None] ** 2
             - 2.0 * t[None, :, None] * rho[:, None, None] * ct[None, None, :])
    j = (dist2 ** (-(1.0 + s))).mean(axis=2) * 2.0 * np.pi   # J(t, rho)
    g = t[None, :] ** (2.0 + 2.0 * s) * j / (2.0 * np.pi)
    integral = g @ wv
    return 2.0 * np.pi / (2.0 * s * radius ** (2.0 * s)) * integral


def exterior_tail_coefficients(grid, s: float) -> np.ndarray:
    """T(x) = integral of |x-y|^(-n-2s) over the region beyond the truncation
    box (modelled as the complement of the ball of grid.tail_radius), for every
    node x.  Exact in 1D; radial quadrature in 2D (closed form at the origin).
    """
    if grid.periodic:
        raise ValueError("tail coefficients are undefined on a torus")
    radius = grid.tail_radius
    if grid.dim == 1:
        return _tail_coeff_1d(grid.coords()[0], radius, s)
    rho = grid.radius_field()
    flat, inverse = np.unique(np.round(rho, 12).ravel(), return_inverse=True)
    vals = np.empty_like(flat)
    chunk = 512
    for i in range(0, flat.size, chunk):
        vals[i:i + chunk] = _tail_coeff_2d(flat[i:i + chunk], radius, s)
    return vals[inverse].reshape(grid.shape)
