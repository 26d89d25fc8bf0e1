"""Kernel coefficients A(x, y) and data kernels D_i.

A kernel coefficient is a symmetric measurable weight with lambda^-1 <= A <= lambda
that modulates the singular interaction |x-y|^(-n-2s).  Translation-invariant
kernels carry an even profile a with A(x, y) = a(x - y); they unlock the exact
spectral oracle and the difference-quotient identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc


class KernelError(ValueError):
    pass


class DiagonalEvaluationError(KernelError):
    pass


GENERAL = "general"
TRANSLATION_INVARIANT = "translation_invariant"


@dataclass(frozen=True)
class KernelCoefficient:
    """Elliptic interaction coefficient with bounds lambda^-1 <= A <= lambda.

    `profile` is the even function a(z) for translation-invariant kernels;
    `evaluator` is the symmetrized two-point map for general kernels.
    `tail_value` is the constant used for interactions reaching beyond the
    truncation box; it must respect the same ellipticity bounds.
    """

    lam: float
    kind: str
    profile: Callable | None = None
    evaluator: Callable | None = None
    tail_value: float = 1.0
    name: str = "kernel"

    def __post_init__(self):
        if self.lam < 1:
            raise KernelError("ellipticity constant lambda must be >= 1")
        if self.kind not in (GENERAL, TRANSLATION_INVARIANT):
            raise KernelError(f"unknown kernel kind {self.kind!r}")
        if self.kind == TRANSLATION_INVARIANT and self.profile is None:
            raise KernelError("translation-invariant kernels need a profile")
        if self.kind == GENERAL and self.evaluator is None:
            raise KernelError("general kernels need an evaluator")
        if not (1.0 / self.lam - 1e-12 <= self.tail_value <= self.lam + 1e-12):
            raise KernelError("tail_value violates the ellipticity bounds")

    @classmethod
    def translation_invariant(cls, profile, lam, tail_value=1.0, name="kernel"):
        return cls(lam=float(lam), kind=TRANSLATION_INVARIANT, profile=profile,
                   tail_value=tail_value, name=name)

    @classmethod
    def general(cls, evaluator, lam, tail_value=1.0, name="kernel"):
        """General kernel; the evaluator is symmetrized at load time so the
        symmetry condition holds by construction."""
        def symmetrized(x, y):
            return 0.5 * (np.asarray(evaluator(x, y)) + np.asarray(evaluator(y, x)))
        return cls(lam=float(lam), kind=GENERAL, evaluator=symmetrized,
                   tail_value=tail_value, name=name)

    @property
    def translation_invariant_kind(self) -> bool:
        return self.kind == TRANSLATION_INVARIANT

    def profile_at(self, z: np.ndarray) -> np.ndarray:
        """Evaluate the displacement profile a(z); z has shape (..., dim)."""
        if not self.translation_invariant_kind:
            raise KernelError("kernel is not translation invariant")
        return np.asarray(self.profile(np.asarray(z, dtype=float)), dtype=float)

    def pair_values(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """A(x, y) on broadcastable point arrays of shape (..., dim)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.translation_invariant_kind:
            return self.profile_at(x - y)
        return np.asarray(self.evaluator(x, y), dtype=float)


def eval_kernel(kernel: KernelCoefficient, x, y) -> float | np.ndarray:
    """A(x, y) for x != y inside the truncation box."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(np.all(np.isclose(x, y, rtol=0.0, atol=0.0), axis=-1)):
        raise DiagonalEvaluationError("diagonal evaluation: x == y")
    out = kernel.pair_values(x, y)
    return float(out) if out.ndim == 0 or out.size == 1 else out


@dataclass(frozen=True)
class DataKernel:
    """Bounded symmetric kernels D_1..D_m with sum_i |D_i| <= big_lambda."""

    profiles: tuple
    big_lambda: float
    kind: str = TRANSLATION_INVARIANT
    evaluators: tuple = ()
    name: str = "data-kernel"

    def __post_init__(self):
        if self.big_lambda <= 0:
            raise KernelError("big_lambda must be positive")
        if self.kind == TRANSLATION_INVARIANT and not self.profiles:
            raise KernelError("data kernel needs at least one profile")

    @property
    def m(self) -> int:
        return len(self.profiles) if self.kind == TRANSLATION_INVARIANT \
            else len(self.evaluators)

    def component(self, i: int) -> KernelCoefficient:
        """Wrap component i for the assembly machinery (no ellipticity)."""
        if self.kind == TRANSLATION_INVARIANT:
            return KernelCoefficient(
                lam=1.0, kind=TRANSLATION_INVARIANT, profile=self.profiles[i],
                tail_value=1.0, name=f"{self.name}[{i}]")
        return KernelCoefficient(
            lam=1.0, kind=GENERAL, evaluator=self.evaluators[i],
            tail_value=1.0, name=f"{self.name}[{i}]")


# -- built-in families -------------------------------------------------------

def constant_kernel(value: float = 1.0, lam: float | None = None) -> KernelCoefficient:
    """The fractional-Laplacian analogue a(z) = value."""
    value = float(value)
    if lam is None:
        lam = max(value, 1.0 / value) if value > 0 else 1.0
    return KernelCoefficient.translation_invariant(
        lambda z: np.full(z.shape[:-1], value), lam,
        tail_value=value, name="constant")


def oscillatory_kernel(lam: float = 2.0, frequency: float = np.pi) -> KernelCoefficient:
    """Smooth even profile sweeping the full ellipticity band [1/lam, lam]."""
    mid = 0.5 * (lam + 1.0 / lam)
    amp = 0.5 * (lam - 1.0 / lam)

    def profile(z):
        r = np.sqrt(np.sum(z ** 2, axis=-1))
        return mid + amp * np.cos(frequency * r)

    return KernelCoefficient.translation_invariant(
        profile, lam, tail_value=mid, name="oscillatory")


def _piecewise_even_table(seed: int, cell: float, extent: float, dim: int,
                          low: float, high: float) -> tuple[np.ndarray, int]:
    """Random values on a coarse displacement lattice, mirror-symmetrized.

    The table covers displacement cells of size `cell` out to +-extent; the
    draw depends only on (seed, cell index), never on the grid spacing, so
    refinement studies refine the discretization rather than the data.
    """
    half = int(np.ceil(extent / cell)) + 1
    size = 2 * half + 1
    rng = np.random.default_rng(seed)
    table = rng.uniform(low, high, size=(size,) * dim)
    table = 0.5 * (table + np.flip(table))  # a(z) = a(-z), staying in [low, high]
    return table, half


def _piecewise_profile(table: np.ndarray, half: int, cell: float, default: float):
    dim = table.ndim

    def profile(z):
        z = np.asarray(z, dtype=float)
        # nearest cell center, rounding half away from zero so that
        # idx(-z) == -idx(z) exactly and the profile stays even
        idx = (np.sign(z) * np.floor(np.abs(z) / cell + 0.5)).astype(int)
        out = np.full(z.shape[:-1], default)
        ok = np.all(np.abs(idx) <= half, axis=-1)
        if np.any(ok):
            flat = tuple((idx[..., a][ok] + half) for a in range(dim))
            out[ok] = table[flat]
        return out

    return profile


def rough_kernel(lam: float = 2.0, seed: int = 0, cell: float = 0.5,
                 extent: float = 16.0, dim: int = 1) -> KernelCoefficient:
    """Seeded piecewise-constant even profile with values in [1/lam, lam].

    Merely measurable coefficients are the point: no continuity across cells.
    Displacements past `extent` fall back to 1 (still inside the band).
    """
    table, half = _piecewise_even_table(seed, cell, extent, dim, 1.0 / lam, lam)
    profile = _piecewise_profile(table, half, cell, default=1.0)
    return KernelCoefficient.translation_invariant(
        profile, lam, tail_value=1.0, name=f"rough(seed={seed})")


def checkerboard_kernel() -> KernelCoefficient:
    """General (non-translation-invariant) kernel: 2 on even parity cells,
    1/2 on odd, symmetric in (x, y) by construction, lambda = 2."""
    def raw(x, y):
        par = np.floor(x[..., 0]) + np.floor(y[..., 0])
        return np.where(np.mod(par, 2) == 0, 2.0, 0.5)
    return KernelCoefficient.general(raw, lam=2.0, tail_value=1.0,
                                     name="checkerboard")


def constant_data_kernel(big_lambda: float = 1.0, m: int = 1) -> DataKernel:
    per = big_lambda / m
    profiles = tuple(
        (lambda z, v=per: np.full(z.shape[:-1], v)) for _ in range(m))
    return DataKernel(profiles=profiles, big_lambda=big_lambda,
                      name="constant-data")


def rough_data_kernel(big_lambda: float = 1.0, m: int = 1, seed: int = 0,
                      cell: float = 0.5, extent: float = 16.0,
                      dim: int = 1) -> DataKernel:
    """Seeded even piecewise profiles d_i with sum_i sup|d_i| <= big_lambda."""
    per = big_lambda / m
    profiles = []
    for i in range(m):
        table, half = _piecewise_even_table(seed + 1000 * i, cell, extent, dim,
                                            -per, per)
        profiles.append(_piecewise_profile(table, half, cell, default=0.0))
    return DataKernel(profiles=tuple(profiles), big_lambda=big_lambda,
                      name=f"rough-data(seed={seed})")


# -- structural verification -------------------------------------------------

@dataclass(frozen=True)
class KernelClassReport:
    bounds_ok: bool
    symmetry_ok: bool
    translation_ok: bool
    max_lower_violation: float
    max_upper_violation: float
    max_symmetry_violation: float
    max_translation_violation: float


def verify_kernel_class(kernel: KernelCoefficient, sample_count: int,
                        extent: float = 8.0, dim: int = 1,
                        shift: float = 1.0) -> KernelClassReport:
    """Sample deterministic quasi-random point pairs and report worst-case
    violations of the ellipticity bounds, symmetry and (when claimed)
    translation invariance."""
    if sample_count < 1:
        raise KernelError("sample_count must be >= 1")
    sob = qmc.Sobol(d=2 * dim, scramble=False)
    n_pow2 = 1 << max(0, int(np.ceil(np.log2(sample_count))))
    pts = sob.random(n_pow2)[:sample_count]
    pts = (2.0 * pts - 1.0) * extent
    x, y = pts[:, :dim], pts[:, dim:]
    coincident = np.all(x == y, axis=-1)
    x = x[~coincident]
    y = y[~coincident]

    axy = kernel.pair_values(x, y)
    ayx = kernel.pair_values(y, x)
    lower = float(np.max(1.0 / kernel.lam - axy, initial=0.0))
    upper = float(np.max(axy - kernel.lam, initial=0.0))
    sym = float(np.max(np.abs(axy - ayx), initial=0.0))

    trans = 0.0
    if kernel.translation_invariant_kind:
        for k in (1, -2, 3):
            t = np.full(dim, k * shift)
            shifted = kernel.pair_values(x + t, y + t)
            trans = max(trans, float(np.max(np.abs(shifted - axy), initial=0.0)))

    tol = 1e-12
    return KernelClassReport(
        bounds_ok=(lower <= tol and upper <= tol),
        symmetry_ok=(sym <= tol),
        translation_ok=(trans <= tol),
        max_lower_violation=lower,
        max_upper_violation=upper,
        max_symmetry_violation=sym,
        max_translation_violation=trans,
    )
