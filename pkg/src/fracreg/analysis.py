"""Real-variable toolkit: maximal functions, norms, level sets, coverings.

The Hardy-Littlewood maximal function is discretized over the finite radius
family {h, 2h, ..., 2 R_box}; ball averages count the ideal lattice ball
(nodes outside the truncation box contribute zeros), so the discrete sup is
bracketed by the continuum sup over radii perturbed by +-h.  The radius-h
ball contains only its center, which gives the pointwise bound M f >= |f|
for free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .assembly import geometric_weight_table
from .grids import Domain, Grid, GridError, GridFunction, measure


class AnalysisError(ValueError):
    pass


PAIR_NODE_CAP = 100_000


def p_star(p: float, n: int, s: float) -> float:
    """Derived data exponent max(pn/(n+ps), 2) used by localization."""
    return max(p * n / (n + p * s), 2.0)


# -- maximal function ----------------------------------------------------------

def _ball_counts_1d(k: int) -> int:
    return 2 * k - 1


def _default_radius_count(grid: Grid) -> int:
    # radius family {h, 2h, ..., 2 R_box}
    extent = grid.period / 2.0 if grid.periodic else grid.node_extent
    return int(np.ceil(2.0 * extent / grid.spacing))


def maximal_function(f: GridFunction, omega: Domain,
                     radii_steps: list[int] | None = None) -> GridFunction:
    """Hardy-Littlewood maximal function of the zero extension of f|_omega.

    Per node: the largest node-average of |f_Omega| over balls B_(k h) from
    the radius family; averages divide by the full lattice ball count, with
    nodes beyond the truncation box counting as zeros.
    """
    grid = f.grid
    if not grid.compatible_with(omega.grid):
        raise GridError("omega lives on a different grid")
    if radii_steps is None:
        radii_steps = list(range(1, _default_radius_count(grid) + 1))
    fz = np.where(omega.mask, np.abs(f.values), 0.0)
    if grid.dim == 1:
        return GridFunction(grid, _maximal_1d(fz, radii_steps), exterior=0.0)
    return GridFunction(grid, _maximal_2d(grid, fz, radii_steps), exterior=0.0)


def _maximal_1d(fz: np.ndarray, radii_steps) -> np.ndarray:
    m = fz.size
    kmax = max(radii_steps)
    padded = np.zeros(m + 2 * kmax)
    padded[kmax:kmax + m] = fz
    csum = np.concatenate([[0.0], np.cumsum(padded)])
    # the radius-h ball is the singleton, so M f >= |f| holds bit-exactly
    best = fz.copy() if 1 in radii_steps else np.zeros(m)
    idx = np.arange(m) + kmax
    for k in radii_steps:
        if k == 1:
            continue
        # |y - x| < k h  <=>  index window of half-width k-1
        subtotal = csum[idx + k] - csum[idx - k + 1]
        np.maximum(best, subtotal / _ball_counts_1d(k), out=best)
    return best


def _maximal_2d(grid: Grid, fz: np.ndarray, radii_steps) -> np.ndarray:
    best = fz.copy() if 1 in radii_steps else np.zeros_like(fz)
    kmax = max(radii_steps)
    io = np.arange(-kmax, kmax + 1)
    d2 = io[:, None] ** 2 + io[None, :] ** 2
    for k in radii_steps:
        if k == 1:
            continue
        disc = (d2 < k * k).astype(float)
        cnt = float(disc.sum())
        window = disc[kmax - (k - 1):kmax + k, kmax - (k - 1):kmax + k]
        total = fftconvolve(fz, window, mode="same")
        np.maximum(best, total / cnt, out=best)
    np.maximum(best, 0.0, out=best)
    return best


@dataclass
class ScalingCheckReport:
    max_discrepancy: float
    compared_nodes: int


def maximal_scaling_check(f: GridFunction, omega: Domain, r: float,
                          y, radii_steps: list[int] | None = None
                          ) -> ScalingCheckReport:
    """Verify M f_{r,y}(x) = M f(r x + y) on the rescaled grid.

    The rescaled function g(x) = f(r x + y) lives on the grid with spacing
    h / r, where lattice balls correspond node-for-node, so with matched
    radius families the identity is exact.  Requires r a power of two and y
    a lattice shift.
    """
    grid = f.grid
    if grid.periodic:
        raise AnalysisError("scaling check runs on truncation boxes")
    j = np.log2(r)
    if abs(j - round(j)) > 1e-12:
        raise AnalysisError("scale r must be a power of two")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    steps = y / grid.spacing
    if np.any(np.abs(steps - np.round(steps)) > 1e-9):
        raise AnalysisError("shift y must be a lattice vector")

    if radii_steps is None:
        radii_steps = list(range(1, _default_radius_count(grid) + 1))
    mf = maximal_function(f, omega, radii_steps)

    h_new = grid.spacing / r
    extent_new = (grid.node_extent - float(np.max(np.abs(y)))) / r
    if extent_new < h_new:
        raise AnalysisError("rescaled grid would be empty; shrink y or r")
    gnew = Grid.box(grid.dim, h_new, extent_new + 0.5 * h_new)

    # g(x) = f(r x + y): every rescaled node maps onto an original node
    src_pts = r * gnew.nodes() + y
    src_idx = np.round(src_pts / grid.spacing).astype(int) \
        + np.array([m // 2 for m in grid.counts])
    vals = f.values[tuple(src_idx[:, a] for a in range(grid.dim))]
    gfun = GridFunction(gnew, vals.reshape(gnew.shape))
    mask = omega.mask[tuple(src_idx[:, a] for a in range(grid.dim))]
    omega_new = Domain(gnew, mask.reshape(gnew.shape))

    mg = maximal_function(gfun, omega_new, radii_steps)
    target = mf.values[tuple(src_idx[:, a] for a in range(grid.dim))]
    disc = np.abs(mg.values.ravel() - target)
    return ScalingCheckReport(max_discrepancy=float(disc.max()),
                              compared_nodes=int(disc.size))


# -- norms and level sets --------------------------------------------------------

@dataclass(frozen=True)
class NormSpec:
    p: float
    region: Domain
    s: float | None = None

    def __post_init__(self):
        if self.p < 1:
            raise AnalysisError("exponent p must be >= 1")


def lp_norm(f: GridFunction, spec: NormSpec) -> float:
    vals = f.values[spec.region.mask]
    if np.isinf(spec.p):
        return float(np.max(np.abs(vals), initial=0.0))
    hn = f.grid.cell_volume
    return float((hn * np.sum(np.abs(vals) ** spec.p)) ** (1.0 / spec.p))


def layer_cake_norm(f: GridFunction, spec: NormSpec) -> float:
    """||f||_p^p via the layer-cake formula, summed exactly over the sorted
    distinct values of f (the distribution function is piecewise constant)."""
    vals = f.values[spec.region.mask]
    if np.any(vals < 0.0):
        raise AnalysisError("layer-cake norm needs f >= 0; take |f| upstream")
    if vals.size == 0:
        return 0.0
    hn = f.grid.cell_volume
    levels = np.unique(vals)
    levels = levels[levels > 0.0]
    if levels.size == 0:
        return 0.0
    # mu(t) = measure{f > t} is constant on [v_j, v_{j+1});
    # p * integral t^(p-1) mu(t) dt = sum_j mu(v_j) (v_{j+1}^p - v_j^p), v_0 = 0
    grid_levels = np.concatenate([[0.0], levels])
    counts_above = np.array([np.sum(vals > t) for t in grid_levels[:-1]])
    mu = hn * counts_above
    return float(np.sum(mu * (grid_levels[1:] ** spec.p
                              - grid_levels[:-1] ** spec.p)))


@dataclass
class LevelSetProfile:
    tau: float
    beta: float
    p: float
    measures: list[float]
    sum_S: float
    lp_power: float
    domain_measure: float
    constant: float
    sandwich_ok: bool

    @property
    def thresholds(self) -> list[float]:
        return [self.tau * self.beta ** (k + 1) for k in range(len(self.measures))]


def sandwich_constant(tau: float, beta: float, p: float) -> float:
    """Explicit constant for the level-set characterization of L^p.

    Derived from the layer-cake formula by bracketing each geometric layer:
      upper:  ||f||_p^p <= (tau beta)^p (|Omega| + S),
      lower:  S <= tau^-p (1 - beta^-p)^-1 ||f||_p^p,
    both hard inequalities for every nonnegative f.
    """
    upper = (tau * beta) ** p
    lower = tau ** (-p) / (1.0 - beta ** (-p))
    return max(upper, lower)


def level_set_sum(f: GridFunction, omega: Domain, tau: float, beta: float,
                  p: float, max_terms: int = 10_000) -> LevelSetProfile:
    """Superlevel-set measures at thresholds tau beta^k and their weighted sum
    S; the profile records the sandwich check against ||f||_p^p."""
    if tau <= 0 or beta <= 1 or p <= 0:
        raise AnalysisError("need tau > 0, beta > 1, p > 0")
    vals = np.abs(f.values[omega.mask])
    hn = f.grid.cell_volume
    measures = []
    ssum = 0.0
    k = 1
    while k <= max_terms:
        mk = hn * float(np.sum(vals > tau * beta ** k))
        if mk == 0.0:
            break
        measures.append(mk)
        ssum += beta ** (k * p) * mk
        k += 1
    lp_pow = hn * float(np.sum(vals ** p))
    const = sandwich_constant(tau, beta, p)
    dom = measure(omega)
    ok = (ssum <= const * lp_pow * (1.0 + 1e-12) + 1e-300
          and lp_pow <= const * (dom + ssum) * (1.0 + 1e-12))
    return LevelSetProfile(tau=tau, beta=beta, p=p, measures=measures,
                           sum_S=ssum, lp_power=lp_pow, domain_measure=dom,
                           constant=const, sandwich_ok=bool(ok))


# -- covering audit ---------------------------------------------------------------

@dataclass
class VitaliReport:
    hypothesis_ok: bool
    conclusion_ok: bool
    conclusion_asserted: bool
    e_measure: float
    f_measure: float
    bound: float
    failing_detail: str = ""


def vitali_audit(e_dom: Domain, f_dom: Domain, unit_ball: Domain,
                 eps: float) -> VitaliReport:
    """Audit the Vitali-type covering lemma on grid-center balls with dyadic
    radii: if |E| < eps |B1| and every ball with E-density >= eps satisfies
    B_r(x) cap B1 subset F, then |E| <= 10^n eps |F|."""
    grid = e_dom.grid
    if not (e_dom.issubset(f_dom) and f_dom.issubset(unit_ball)):
        raise AnalysisError("need E subset F subset B1")
    if not 0.0 < eps < 1.0:
        raise AnalysisError("eps must lie in (0, 1)")
    me, mf, mb = measure(e_dom), measure(f_dom), measure(unit_ball)
    hyp_ok = me < eps * mb
    detail = "" if hyp_ok else f"|E| = {me} >= eps |B1| = {eps * mb}"

    if hyp_ok:
        centers = grid.nodes()[unit_ball.mask.ravel()]
        radii = []
        r = 0.5
        while r >= grid.spacing:
            radii.append(r)
            r /= 2.0
        nodes = grid.nodes()
        for r in radii:
            d2 = ((centers[:, None, :] - nodes[None, :, :]) ** 2).sum(-1)
            inside = d2 < r * r  # (n_centers, n_nodes)
            ball_counts = inside.sum(axis=1)
            e_counts = inside[:, e_dom.mask.ravel()].sum(axis=1)
            dense = e_counts >= eps * ball_counts
            if not np.any(dense):
                continue
            cap_b1 = inside[:, unit_ball.mask.ravel()]
            in_f = f_dom.mask.ravel()[unit_ball.mask.ravel()]
            bad = dense & np.any(cap_b1 & ~in_f[None, :], axis=1)
            if np.any(bad):
                i = int(np.argmax(bad))
                hyp_ok = False
                detail = (f"density ball at {centers[i]} (r={r}) "
                          "is not contained in F")
                break

    bound = 10.0 ** grid.dim * eps * mf
    concl_ok = me <= bound * (1.0 + 1e-12)
    return VitaliReport(hypothesis_ok=hyp_ok,
                        conclusion_ok=concl_ok,
                        conclusion_asserted=hyp_ok,
                        e_measure=me, f_measure=mf, bound=bound,
                        failing_detail=detail)


# -- seminorms --------------------------------------------------------------------

def _region_pairs_guard(region: Domain):
    if region.node_count > PAIR_NODE_CAP:
        raise AnalysisError(
            f"region has {region.node_count} nodes; pairwise operations are "
            f"capped at {PAIR_NODE_CAP}")
    if region.node_count == 0:
        raise AnalysisError("empty region")


def holder_seminorm(u: GridFunction, alpha: float, region: Domain,
                    chunk: int = 512) -> float:
    """sup over node pairs in the region of |u(x)-u(y)| / |x-y|^alpha."""
    if not 0.0 < alpha < 1.0:
        raise AnalysisError("alpha must lie in (0, 1)")
    _region_pairs_guard(region)
    pts = region.grid.nodes()[region.mask.ravel()]
    vals = u.values[region.mask]
    best = 0.0
    for lo in range(0, pts.shape[0], chunk):
        hi = min(lo + chunk, pts.shape[0])
        d2 = ((pts[lo:hi, None, :] - pts[None, :, :]) ** 2).sum(-1)
        du = np.abs(vals[lo:hi, None] - vals[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = du / d2 ** (0.5 * alpha)
        q[d2 == 0.0] = 0.0
        best = max(best, float(q.max()))
    return best


def slobodeckij_seminorm(u: GridFunction, region: Domain, s: float,
                         p: float, chunk: int = 512) -> float:
    """Raw Gagliardo double sum over region x region:
    sum h^(2n) |u(x)-u(y)|^p / |x-y|^(n+sp), with the touching-cell
    correction of the assembly module (where the exact integral exists).
    At p = 2 this equals the constant-kernel bilinear form restricted to the
    region."""
    if p < 1:
        raise AnalysisError("p must be >= 1")
    _region_pairs_guard(region)
    grid = region.grid
    nu = grid.dim + s * p
    table = geometric_weight_table(grid, nu)
    multi = np.argwhere(region.mask)
    vals = u.values[region.mask]
    total = 0.0
    for lo in range(0, multi.shape[0], chunk):
        hi = min(lo + chunk, multi.shape[0])
        idx = []
        for a in range(grid.dim):
            d = multi[lo:hi, None, a] - multi[None, :, a]
            idx.append(np.mod(d, grid.counts[a]) if grid.periodic
                       else d + grid.counts[a] - 1)
        w = table[tuple(idx)]
        du = np.abs(vals[lo:hi, None] - vals[None, :])
        total += float(np.sum(w * du ** p))
    return total


def poincare_quotient(u: GridFunction, omega: Domain, s: float) -> float:
    """||u - mean||_L2(Omega)^2 over the Gagliardo energy on Omega x Omega."""
    _region_pairs_guard(omega)
    energy = slobodeckij_seminorm(u, omega, s, 2.0)
    if energy <= 0.0:
        raise AnalysisError("zero seminorm: u is constant on omega")
    vals = u.values[omega.mask]
    hn = omega.grid.cell_volume
    num = hn * float(np.sum((vals - vals.mean()) ** 2))
    return num / energy
