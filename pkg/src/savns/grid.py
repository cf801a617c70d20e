"""Staggered (MAC) grid geometry and field containers.

Layout for an ``nx x ny`` cell grid over ``[x0, x1] x [y0, y1]``:

    scalars    p[i, j]  at ((i + 1/2) hx, (j + 1/2) hy)   shape (nx, ny)
    u-velocity u[i, j]  at (i hx,         (j + 1/2) hy)   shape (nx+1, ny)
    v-velocity v[i, j]  at ((i + 1/2) hx, j hy)           shape (nx, ny+1)

coordinates relative to (x0, y0). The first index always runs along x, the
second along y. The u-samples with i in {0, nx} and the v-samples with
j in {0, ny} sit exactly on the boundary; a velocity field satisfying the
no-penetration condition is zero there. This placement makes the discrete
divergence and gradient exact adjoints of each other, which is what every
stability property downstream relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ShapeMismatchError(ValueError):
    """An array does not match the staggered layout of its grid."""


@dataclass(frozen=True)
class Grid:
    """Uniform staggered grid: cell counts and domain extents.

    hx and hy are derived, so hx == (x1 - x0)/nx holds by construction.
    """

    nx: int
    ny: int
    x0: float = 0.0
    y0: float = 0.0
    x1: float = 1.0
    y1: float = 1.0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"grid needs nx, ny >= 2, got {self.nx} x {self.ny}")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("degenerate domain extents")

    @property
    def hx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def hy(self) -> float:
        return (self.y1 - self.y0) / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    # Sample-point coordinates, broadcastable to the field shapes.
    def u_points(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.x0 + self.hx * np.arange(self.nx + 1)
        y = self.y0 + self.hy * (np.arange(self.ny) + 0.5)
        return np.meshgrid(x, y, indexing="ij")

    def v_points(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.x0 + self.hx * (np.arange(self.nx) + 0.5)
        y = self.y0 + self.hy * np.arange(self.ny + 1)
        return np.meshgrid(x, y, indexing="ij")

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.x0 + self.hx * (np.arange(self.nx) + 0.5)
        y = self.y0 + self.hy * (np.arange(self.ny) + 0.5)
        return np.meshgrid(x, y, indexing="ij")

    def node_points(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.x0 + self.hx * np.arange(self.nx + 1)
        y = self.y0 + self.hy * np.arange(self.ny + 1)
        return np.meshgrid(x, y, indexing="ij")


def unit_square(n: int) -> Grid:
    """n x n cells on (0,1) x (0,1)."""
    return Grid(nx=n, ny=n)


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise ShapeMismatchError("fields live on different grids")


@dataclass
class CellField:
    """Scalar samples at cell centers (pressure, divergence, splitting scalars)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise ShapeMismatchError(
                f"cell field shape {self.values.shape} != {(self.grid.nx, self.grid.ny)}"
            )

    @classmethod
    def zeros(cls, grid: Grid) -> "CellField":
        return cls(grid, np.zeros((grid.nx, grid.ny)))

    def copy(self) -> "CellField":
        return CellField(self.grid, self.values.copy())

    def mean(self) -> float:
        # uniform cells, so the quadrature mean is the plain average
        return float(self.values.mean())

    def __add__(self, other: "CellField") -> "CellField":
        _check_same_grid(self, other)
        return CellField(self.grid, self.values + other.values)

    def __sub__(self, other: "CellField") -> "CellField":
        _check_same_grid(self, other)
        return CellField(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "CellField":
        return CellField(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self) -> "CellField":
        return CellField(self.grid, -self.values)


@dataclass
class VelocityField:
    """Velocity samples on cell edges: u on vertical edges, v on horizontal edges."""

    grid: Grid
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        nx, ny = self.grid.nx, self.grid.ny
        if self.u.shape != (nx + 1, ny):
            raise ShapeMismatchError(f"u shape {self.u.shape} != {(nx + 1, ny)}")
        if self.v.shape != (nx, ny + 1):
            raise ShapeMismatchError(f"v shape {self.v.shape} != {(nx, ny + 1)}")

    @classmethod
    def zeros(cls, grid: Grid) -> "VelocityField":
        return cls(grid, np.zeros((grid.nx + 1, grid.ny)), np.zeros((grid.nx, grid.ny + 1)))

    def copy(self) -> "VelocityField":
        return VelocityField(self.grid, self.u.copy(), self.v.copy())

    def zero_normal_boundary(self) -> "VelocityField":
        """Copy with boundary-normal samples pinned to zero (no-penetration)."""
        out = self.copy()
        out.u[0, :] = 0.0
        out.u[-1, :] = 0.0
        out.v[:, 0] = 0.0
        out.v[:, -1] = 0.0
        return out

    def normal_boundary_max(self) -> float:
        """Largest boundary-normal sample magnitude (0 for no-penetration fields)."""
        return max(
            float(np.abs(self.u[0, :]).max()),
            float(np.abs(self.u[-1, :]).max()),
            float(np.abs(self.v[:, 0]).max()),
            float(np.abs(self.v[:, -1]).max()),
        )

    def __add__(self, other: "VelocityField") -> "VelocityField":
        _check_same_grid(self, other)
        return VelocityField(self.grid, self.u + other.u, self.v + other.v)

    def __sub__(self, other: "VelocityField") -> "VelocityField":
        _check_same_grid(self, other)
        return VelocityField(self.grid, self.u - other.u, self.v - other.v)

    def __mul__(self, c: float) -> "VelocityField":
        return VelocityField(self.grid, self.u * c, self.v * c)

    __rmul__ = __mul__

    def __neg__(self) -> "VelocityField":
        return VelocityField(self.grid, -self.u, -self.v)
