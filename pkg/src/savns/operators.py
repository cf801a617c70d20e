"""Discrete differential and integral operators on the staggered grid.

All operators are pure functions. Boundary conventions:

  * divergence / gradient form an exact adjoint pair for no-penetration
    fields with the quadrature below, so summation by parts holds to
    machine precision.
  * the velocity Laplacian enforces homogeneous Dirichlet walls with odd
    ghost reflection (ghost = -interior across a tangential wall) and pins
    boundary-normal samples to zero. With this choice the operator is
    symmetric negative definite on the interior unknowns and
    -(lap(w), w) is exactly a weighted sum of squared edge differences,
    which is what norm_h1_semi returns.
  * quadrature weights on boundary-normal samples are halved so that the
    inner product integrates constants exactly and the adjointness
    identity is exact.
"""

from __future__ import annotations

import numpy as np

from .grid import CellField, Grid, ShapeMismatchError, VelocityField


def divergence(w: VelocityField) -> CellField:
    """Discrete divergence at cell centers. Exact for fields linear in x, y."""
    g = w.grid
    vals = (w.u[1:, :] - w.u[:-1, :]) / g.hx + (w.v[:, 1:] - w.v[:, :-1]) / g.hy
    return CellField(g, vals)


def gradient(p: CellField) -> VelocityField:
    """Centered pressure gradient on interior edges; boundary-normal edges get 0.

    The zero rows/columns are consistent with homogeneous Neumann data for
    pressure increments across the walls.
    """
    g = p.grid
    gu = np.zeros((g.nx + 1, g.ny))
    gv = np.zeros((g.nx, g.ny + 1))
    gu[1:-1, :] = (p.values[1:, :] - p.values[:-1, :]) / g.hx
    gv[:, 1:-1] = (p.values[:, 1:] - p.values[:, :-1]) / g.hy
    return VelocityField(g, gu, gv)


def _extend_u_tangential(u: np.ndarray) -> np.ndarray:
    """u with odd-reflected ghost rows below y0 and above y1."""
    ext = np.empty((u.shape[0], u.shape[1] + 2))
    ext[:, 1:-1] = u
    ext[:, 0] = -u[:, 0]
    ext[:, -1] = -u[:, -1]
    return ext


def _extend_v_tangential(v: np.ndarray) -> np.ndarray:
    """v with odd-reflected ghost columns left of x0 and right of x1."""
    ext = np.empty((v.shape[0] + 2, v.shape[1]))
    ext[1:-1, :] = v
    ext[0, :] = -v[0, :]
    ext[-1, :] = -v[-1, :]
    return ext


def laplacian_dirichlet(w: VelocityField, mu: float) -> VelocityField:
    """mu times the 5-point Laplacian with homogeneous Dirichlet walls.

    Boundary-normal samples of the result are set to zero (those unknowns
    are pinned by the boundary condition, not evolved).
    """
    g = w.grid
    hx2, hy2 = g.hx * g.hx, g.hy * g.hy

    ue = _extend_u_tangential(w.u)
    lu = np.zeros_like(w.u)
    lu[1:-1, :] = (w.u[2:, :] - 2.0 * w.u[1:-1, :] + w.u[:-2, :]) / hx2 + (
        ue[1:-1, 2:] - 2.0 * ue[1:-1, 1:-1] + ue[1:-1, :-2]
    ) / hy2

    ve = _extend_v_tangential(w.v)
    lv = np.zeros_like(w.v)
    lv[:, 1:-1] = (w.v[:, 2:] - 2.0 * w.v[:, 1:-1] + w.v[:, :-2]) / hy2 + (
        ve[2:, 1:-1] - 2.0 * ve[1:-1, 1:-1] + ve[:-2, 1:-1]
    ) / hx2

    return VelocityField(g, mu * lu, mu * lv)


def convect(a: VelocityField, b: VelocityField) -> VelocityField:
    """Advective-form convection (a . grad) b at velocity points.

    Off-location factors use 4-point averages of the nearest samples;
    tangential derivatives next to a wall use the odd ghost implied by
    b = 0 on the wall. Boundary-normal samples of the result are zero.
    """
    g = a.grid
    if b.grid != g:
        raise ShapeMismatchError("convect arguments live on different grids")
    hx, hy = g.hx, g.hy

    # u-component at interior vertical edges i = 1..nx-1, all j
    au = a.u[1:-1, :]
    be = _extend_u_tangential(b.u)
    dbdx = (b.u[2:, :] - b.u[:-2, :]) / (2.0 * hx)
    dbdy = (be[1:-1, 2:] - be[1:-1, :-2]) / (2.0 * hy)
    a_v_at_u = 0.25 * (a.v[:-1, :-1] + a.v[:-1, 1:] + a.v[1:, :-1] + a.v[1:, 1:])
    cu = np.zeros_like(b.u)
    cu[1:-1, :] = au * dbdx + a_v_at_u * dbdy

    # v-component at interior horizontal edges j = 1..ny-1, all i
    av = a.v[:, 1:-1]
    bev = _extend_v_tangential(b.v)
    dbdy_v = (b.v[:, 2:] - b.v[:, :-2]) / (2.0 * hy)
    dbdx_v = (bev[2:, 1:-1] - bev[:-2, 1:-1]) / (2.0 * hx)
    a_u_at_v = 0.25 * (a.u[:-1, :-1] + a.u[1:, :-1] + a.u[:-1, 1:] + a.u[1:, 1:])
    cv = np.zeros_like(b.v)
    cv[:, 1:-1] = a_u_at_v * dbdx_v + av * dbdy_v

    return VelocityField(g, cu, cv)


def _edge_weights(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    wu = np.ones((grid.nx + 1, grid.ny))
    wu[0, :] = 0.5
    wu[-1, :] = 0.5
    wv = np.ones((grid.nx, grid.ny + 1))
    wv[:, 0] = 0.5
    wv[:, -1] = 0.5
    return wu, wv


def inner(a: VelocityField, b: VelocityField) -> float:
    """Discrete L2 pairing of velocity fields (halved boundary-normal weights)."""
    g = a.grid
    if b.grid != g:
        raise ShapeMismatchError("inner arguments live on different grids")
    wu, wv = _edge_weights(g)
    return g.cell_area * (float(np.sum(wu * a.u * b.u)) + float(np.sum(wv * a.v * b.v)))


def inner_cell(p: CellField, q: CellField) -> float:
    """Discrete L2 pairing of cell fields."""
    if p.grid != q.grid:
        raise ShapeMismatchError("inner_cell arguments live on different grids")
    return p.grid.cell_area * float(np.sum(p.values * q.values))


def norm_l2(w: VelocityField) -> float:
    return np.sqrt(max(inner(w, w), 0.0))


def norm_l2_cell(p: CellField) -> float:
    return np.sqrt(max(inner_cell(p, p), 0.0))


def norm_h1_semi(w: VelocityField) -> float:
    """Discrete H1 seminorm, assembled so that |grad w|^2 = -(lap w, w).

    Intended for fields vanishing on the walls (the Dirichlet solutions
    produced by the schemes); for those the value is a genuine weighted sum
    of squared edge differences and is nonnegative.
    """
    return np.sqrt(max(-inner(laplacian_dirichlet(w, 1.0), w), 0.0))


def grad_norm_l2(p: CellField) -> float:
    """Edge-difference norm of the pressure gradient, |gradient(p)|."""
    return norm_l2(gradient(p))


def div_max(w: VelocityField) -> float:
    return float(np.abs(divergence(w).values).max())
