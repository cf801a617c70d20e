"""Manufactured solutions, their body forces, and staggered-grid samplers.

Both benchmark cases live on the unit square with velocity vanishing on
the walls, pointwise divergence-free velocity, and mean-zero pressure.
The body force is the momentum residual f = u_t + (u . grad) u
- nu lap(u) + grad(p), hand-differentiated and frozen as closed forms;
the test suite validates it against a high-order finite-difference
residual before any solver run depends on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import CellField, Grid, VelocityField

PI = math.pi


@dataclass(frozen=True)
class ManufacturedCase:
    name: str
    nu: float
    velocity: Callable  # (x, y, t) -> (u1, u2)
    pressure: Callable  # (x, y, t) -> p
    body_force: Callable  # (x, y, t) -> (f1, f2)


def example1(nu: float = 0.1) -> ManufacturedCase:
    """Trigonometric vortex pair: u = sin(t) (sin^2(pi x) sin(2 pi y),
    -sin(2 pi x) sin^2(pi y)), p = sin(t)(sin(pi y) - 2/pi)."""

    def velocity(x, y, t):
        s = np.sin(t)
        u1 = s * np.sin(PI * x) ** 2 * np.sin(2 * PI * y)
        u2 = -s * np.sin(2 * PI * x) * np.sin(PI * y) ** 2
        return u1, u2

    def pressure(x, y, t):
        return np.sin(t) * (np.sin(PI * y) - 2.0 / PI)

    def body_force(x, y, t):
        s, c = np.sin(t), np.cos(t)
        sx, s2x, cx2 = np.sin(PI * x) ** 2, np.sin(2 * PI * x), np.cos(2 * PI * x)
        sy, s2y, cy2 = np.sin(PI * y) ** 2, np.sin(2 * PI * y), np.cos(2 * PI * y)

        u1 = s * sx * s2y
        u2 = -s * s2x * sy
        u1_t = c * sx * s2y
        u2_t = -c * s2x * sy
        u1_x = PI * s * s2x * s2y
        u1_y = 2 * PI * s * sx * cy2
        u2_x = -2 * PI * s * cx2 * sy
        u2_y = -PI * s * s2x * s2y
        lap_u1 = 2 * PI**2 * s * cx2 * s2y - 4 * PI**2 * s * sx * s2y
        lap_u2 = 4 * PI**2 * s * s2x * sy - 2 * PI**2 * s * s2x * cy2
        p_x = np.zeros_like(u1)
        p_y = PI * s * np.cos(PI * y)

        f1 = u1_t + u1 * u1_x + u2 * u1_y - nu * lap_u1 + p_x
        f2 = u2_t + u1 * u2_x + u2 * u2_y - nu * lap_u2 + p_y
        return f1, f2

    return ManufacturedCase("example1", nu, velocity, pressure, body_force)


def _poly_p(s):
    return s * s * (s - 1.0) ** 2


def _poly_q(s):
    return s * (s - 1.0) * (2.0 * s - 1.0)


def _poly_q1(s):
    return 6.0 * s * s - 6.0 * s + 1.0


def _poly_q2(s):
    return 12.0 * s - 6.0


def example2(nu: float = 0.1) -> ManufacturedCase:
    """Polynomial vortex: u = 128 t^2 (-P(x) Q(y), P(y) Q(x)) with
    P(s) = s^2 (s-1)^2 and Q = P'/2, p = t^2 (x - 1/2)."""

    def velocity(x, y, t):
        t2 = t * t
        u1 = -128.0 * t2 * _poly_p(x) * _poly_q(y)
        u2 = 128.0 * t2 * _poly_p(y) * _poly_q(x)
        return u1, u2

    def pressure(x, y, t):
        return t * t * (x - 0.5)

    def body_force(x, y, t):
        t2 = t * t
        px_, qx, qx1, qx2 = _poly_p(x), _poly_q(x), _poly_q1(x), _poly_q2(x)
        py_, qy, qy1, qy2 = _poly_p(y), _poly_q(y), _poly_q1(y), _poly_q2(y)

        u1 = -128.0 * t2 * px_ * qy
        u2 = 128.0 * t2 * py_ * qx
        u1_t = -256.0 * t * px_ * qy
        u2_t = 256.0 * t * py_ * qx
        u1_x = -256.0 * t2 * qx * qy
        u1_y = -128.0 * t2 * px_ * qy1
        u2_x = 128.0 * t2 * py_ * qx1
        u2_y = 256.0 * t2 * qy * qx
        lap_u1 = -256.0 * t2 * qx1 * qy - 128.0 * t2 * px_ * qy2
        lap_u2 = 128.0 * t2 * py_ * qx2 + 256.0 * t2 * qy1 * qx
        p_x = np.full_like(np.asarray(u1, dtype=float), t2)
        p_y = np.zeros_like(p_x)

        f1 = u1_t + u1 * u1_x + u2 * u1_y - nu * lap_u1 + p_x
        f2 = u2_t + u1 * u2_x + u2 * u2_y - nu * lap_u2 + p_y
        return f1, f2

    return ManufacturedCase("example2", nu, velocity, pressure, body_force)


def get_case(name: str, nu: float = 0.1) -> ManufacturedCase:
    if name in ("1", "example1"):
        return example1(nu)
    if name in ("2", "example2"):
        return example2(nu)
    raise ValueError(f"unknown manufactured case {name!r}")


def exact(case: ManufacturedCase, x, y, t):
    """(u1, u2, p) of the closed-form solution."""
    u1, u2 = case.velocity(x, y, t)
    return u1, u2, case.pressure(x, y, t)


def forcing(case: ManufacturedCase, x, y, t):
    """(f1, f2) of the closed-form body force."""
    return case.body_force(x, y, t)


def sample_on_grid(case: ManufacturedCase, grid: Grid, t: float) -> tuple[VelocityField, CellField]:
    """Exact fields at the staggered sample points; pressure mean-subtracted."""
    xu, yu = grid.u_points()
    xv, yv = grid.v_points()
    xc, yc = grid.cell_centers()
    u1, _ = case.velocity(xu, yu, t)
    _, u2 = case.velocity(xv, yv, t)
    p = case.pressure(xc, yc, t)
    p = p - p.mean()
    return VelocityField(grid, u1, u2), CellField(grid, p)


def forcing_field(case: ManufacturedCase, grid: Grid, t: float) -> VelocityField:
    """Body force sampled pointwise at the staggered velocity points."""
    xu, yu = grid.u_points()
    xv, yv = grid.v_points()
    f1, _ = case.body_force(xu, yu, t)
    _, f2 = case.body_force(xv, yv, t)
    return VelocityField(grid, f1, f2)


def stability_ic(grid: Grid, seed: int = 0, modes: int = 3, amplitude: float = 1.0) -> VelocityField:
    """Smooth random initial velocity, discretely divergence-free.

    Built from a node-based stream function that vanishes on the boundary
    ring, so the edge differences cancel exactly in the discrete divergence
    and the boundary-normal samples are exactly zero.
    """
    rng = np.random.default_rng(seed)
    xn, yn = grid.node_points()
    xs = (xn - grid.x0) / (grid.x1 - grid.x0)
    ys = (yn - grid.y0) / (grid.y1 - grid.y0)
    psi = np.zeros_like(xs)
    for k in range(1, modes + 1):
        for l in range(1, modes + 1):
            coeff = amplitude * rng.standard_normal() / (k * k + l * l)
            psi += coeff * np.sin(k * PI * xs) * np.sin(l * PI * ys)
    u = (psi[:, 1:] - psi[:, :-1]) / grid.hy
    v = -(psi[1:, :] - psi[:-1, :]) / grid.hx
    return VelocityField(grid, u, v)
