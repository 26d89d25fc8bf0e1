"""Uniform Cartesian truncations of R^n, masked domains and node fields.

Nodes are cell centers: node index (i_1, ..., i_n) sits at (i_k - m_k // 2) * h,
so the origin is always a node.  On a non-periodic grid the node-centered cells
of volume h^n tile the truncation box; everything beyond the box is covered by
a constant exterior value plus analytic tail corrections (see assembly).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    dim: int
    spacing: float
    counts: tuple[int, ...]
    periodic: bool = False

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GridError(f"dim must be 1 or 2, got {self.dim}")
        if self.spacing <= 0:
            raise GridError("spacing must be positive")
        if len(self.counts) != self.dim or any(m < 2 for m in self.counts):
            raise GridError(f"bad axis counts {self.counts}")
        if not self.periodic and any(m % 2 == 0 for m in self.counts):
            raise GridError("truncation boxes need an odd node count per axis")

    @classmethod
    def box(cls, dim: int, spacing: float, box_radius: float) -> "Grid":
        """Truncation of R^n to [-box_radius, box_radius]^n with odd node counts."""
        if box_radius <= 0:
            raise GridError("box_radius must be positive")
        half = int(np.floor(box_radius / spacing + 1e-12))
        if half < 1:
            raise GridError("box_radius smaller than one spacing")
        return cls(dim, float(spacing), (2 * half + 1,) * dim, periodic=False)

    @classmethod
    def torus(cls, dim: int, spacing: float, count: int) -> "Grid":
        """Periodic lattice with `count` nodes per axis (even counts allowed)."""
        return cls(dim, float(spacing), (int(count),) * dim, periodic=True)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.counts))

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    def axis_coords(self, axis: int = 0) -> np.ndarray:
        m = self.counts[axis]
        return (np.arange(m) - m // 2) * self.spacing

    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of shape `self.shape`, one per axis."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape (n_nodes, dim), row-major node order."""
        return np.stack([c.ravel() for c in self.coords()], axis=-1)

    def radius_field(self) -> np.ndarray:
        """Euclidean distance |x| from the origin at every node."""
        cs = self.coords()
        return np.sqrt(sum(c ** 2 for c in cs))

    @property
    def node_extent(self) -> float:
        """Largest node coordinate per axis (non-periodic grids)."""
        if self.periodic:
            raise GridError("node_extent is undefined on a torus")
        return (self.counts[0] // 2) * self.spacing

    @property
    def tail_radius(self) -> float:
        """Radius beyond which the analytic tail formula takes over.

        The cells of the outermost nodes reach h/2 past the last node, so the
        quadrature region is treated as the ball of this radius.
        """
        return self.node_extent + 0.5 * self.spacing

    @property
    def period(self) -> float:
        if not self.periodic:
            raise GridError("period is only defined on a torus")
        return self.counts[0] * self.spacing

    def boundary_layer_mask(self) -> np.ndarray:
        """Mask of the outermost node layer (width one node)."""
        mask = np.zeros(self.shape, dtype=bool)
        for a in range(self.dim):
            idx = [slice(None)] * self.dim
            idx[a] = 0
            mask[tuple(idx)] = True
            idx[a] = -1
            mask[tuple(idx)] = True
        return mask

    def wrap_displacement(self, disp: np.ndarray) -> np.ndarray:
        """Minimal-image displacement on a torus (identity on boxes)."""
        if not self.periodic:
            return disp
        L = self.period
        return disp - L * np.round(disp / L)

    def compatible_with(self, other: "Grid") -> bool:
        return (
            self.dim == other.dim
            and self.counts == other.counts
            and np.isclose(self.spacing, other.spacing)
            and self.periodic == other.periodic
        )


@dataclass(frozen=True, eq=False)
class Domain:
    """A masked node set representing an open region of the grid.

    `unbounded=True` marks complements such as R^n \\ B_R: the mask covers the
    in-box part and the region implicitly extends past the truncation box.
    """

    grid: Grid
    mask: np.ndarray
    unbounded: bool = False

    def __post_init__(self):
        if self.mask.shape != self.grid.shape:
            raise GridError("mask shape does not match grid")
        if self.mask.dtype != np.bool_:
            object.__setattr__(self, "mask", self.mask.astype(bool))

    @property
    def node_count(self) -> int:
        return int(self.mask.sum())

    def complement(self) -> "Domain":
        return Domain(self.grid, ~self.mask, unbounded=not self.grid.periodic)

    def __or__(self, other: "Domain") -> "Domain":
        if not self.grid.compatible_with(other.grid):
            raise GridError("domains live on different grids")
        return Domain(self.grid, self.mask | other.mask,
                      unbounded=self.unbounded or other.unbounded)

    def __and__(self, other: "Domain") -> "Domain":
        if not self.grid.compatible_with(other.grid):
            raise GridError("domains live on different grids")
        return Domain(self.grid, self.mask & other.mask, unbounded=False)

    def issubset(self, other: "Domain") -> bool:
        return bool(np.all(~self.mask | other.mask))


def build_ball_domain(grid: Grid, center, radius: float) -> Domain:
    """Nodes with |x - center| < radius (open ball).

    On a truncation box the ball must stay clear of the outermost node layer,
    otherwise quadrature near the boundary silently degrades; violating balls
    raise "truncation too small".
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.shape != (grid.dim,):
        raise GridError(f"center must have {grid.dim} coordinates")
    if radius <= 0:
        raise GridError("radius must be positive")
    cs = grid.coords()
    if grid.periodic:
        d2 = sum(grid.wrap_displacement(c - z) ** 2 for c, z in zip(cs, center))
    else:
        d2 = sum((c - z) ** 2 for c, z in zip(cs, center))
        if float(np.max(np.abs(center))) + radius > grid.node_extent \
                - grid.spacing + 1e-12:
            raise GridError("truncation too small: ball does not fit strictly "
                            "inside the box clear of the boundary layer")
    mask = d2 < radius ** 2
    return Domain(grid, mask)


def full_box_domain(grid: Grid) -> Domain:
    return Domain(grid, np.ones(grid.shape, dtype=bool))


def measure(domain: Domain) -> float:
    """h^n times the masked node count (discrete Lebesgue measure)."""
    if domain.unbounded:
        raise GridError("measure of an unbounded domain")
    return domain.grid.cell_volume * domain.node_count


@dataclass(eq=False)
class GridFunction:
    """Node values on the full truncation box plus a constant exterior value.

    The exterior rule Zero is the constant 0; test functions vanishing outside
    a mask are represented by zero values there and exterior 0.
    """

    grid: Grid
    values: np.ndarray
    exterior: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise GridError("values shape does not match grid")

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.shape, float(c)), exterior=float(c))

    @classmethod
    def from_callable(cls, grid: Grid, fn, exterior: float = 0.0) -> "GridFunction":
        """Sample fn(*coordinate arrays) at every node."""
        vals = np.asarray(fn(*grid.coords()), dtype=float)
        return cls(grid, np.broadcast_to(vals, grid.shape).copy(), exterior=exterior)

    @classmethod
    def indicator(cls, domain: Domain) -> "GridFunction":
        return cls(domain.grid, domain.mask.astype(float), exterior=0.0)

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy(), self.exterior)

    def __add__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self.grid, self.values + other.values,
                                self.exterior + other.exterior)
        return GridFunction(self.grid, self.values + other, self.exterior + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self.grid, self.values - other.values,
                                self.exterior - other.exterior)
        return GridFunction(self.grid, self.values - other, self.exterior - other)

    def __mul__(self, scalar):
        return GridFunction(self.grid, self.values * scalar, self.exterior * scalar)

    __rmul__ = __mul__

    def restricted(self, domain: Domain) -> "GridFunction":
        """Zero extension of the restriction to `domain` (exterior 0)."""
        vals = np.where(domain.mask, self.values, 0.0)
        return GridFunction(self.grid, vals, exterior=0.0)

    # -- I/O ---------------------------------------------------------------

    def to_csv(self, path) -> None:
        nodes = self.grid.nodes()
        data = np.column_stack([nodes, self.values.ravel()])
        np.savetxt(path, data, delimiter=",", fmt="%.17g")

    @classmethod
    def from_csv(cls, grid: Grid, path, exterior: float = 0.0) -> "GridFunction":
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        if data.shape != (grid.n_nodes, grid.dim + 1):
            raise GridError(
                f"CSV shape {data.shape} does not match grid with "
                f"{grid.n_nodes} nodes in dimension {grid.dim}")
        nodes = grid.nodes()
        if not np.allclose(data[:, : grid.dim], nodes, atol=1e-9 * grid.spacing):
            raise GridError("CSV node coordinates do not match the grid")
        return cls(grid, data[:, -1].reshape(grid.shape), exterior=exterior)

    def to_binary(self, path) -> None:
        """Flat little-endian float64 dump in row-major node order."""
        self.values.astype("<f8").ravel().tofile(path)

    @classmethod
    def from_binary(cls, grid: Grid, path, exterior: float = 0.0) -> "GridFunction":
        raw = np.fromfile(path, dtype="<f8")
        if raw.size != grid.n_nodes:
            raise GridError(
                f"binary file holds {raw.size} values, grid has {grid.n_nodes} nodes")
        return cls(grid, raw.astype(float).reshape(grid.shape), exterior=exterior)


def mean_over(u: GridFunction, domain: Domain) -> float:
    """Node average of u over the domain mask."""
    if domain.node_count == 0:
        raise GridError("mean over an empty domain")
    return float(u.values[domain.mask].mean())
