"""Constant-coefficient elliptic solves used by every time step.

Two problems, two backends each:

  * (alpha I - nu lap) w = rhs with homogeneous Dirichlet walls, solved
    componentwise for the u and v unknowns (the implicit viscous step).
  * -lap phi = rhs at cell centers with homogeneous Neumann walls,
    returning the mean-zero representative (the pressure-increment step).

The "direct" backend diagonalizes the separable stencils with fast sine /
cosine transforms (DST-I along edge-node directions, DST-II along
cell-center directions with Dirichlet ghosts, DCT-II for Neumann) and is
exact to roundoff. The "cg" backend is a matrix-free conjugate gradient
sharing nothing with the direct path, so the two can cross-check each
other. Both verify the residual of what they return; a bad answer raises
instead of being handed back silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft

from .grid import CellField, Grid, VelocityField
from .operators import laplacian_dirichlet, norm_l2, norm_l2_cell

BACKENDS = ("direct", "cg")


@dataclass(frozen=True)
class Tolerances:
    tol_rel: float = 1e-11
    tol_abs: float = 1e-14
    compat_tol: float = 1e-10
    max_iter: int = 50_000

    def threshold(self, rhs_norm: float) -> float:
        return self.tol_abs + self.tol_rel * rhs_norm


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    residual_l2: float
    converged: bool


class SolveFailure(RuntimeError):
    """A linear solve did not reach its tolerance."""

    def __init__(self, message: str, report: SolveReport):
        super().__init__(f"{message} (iterations={report.iterations}, "
                         f"residual={report.residual_l2:.3e})")
        self.report = report


class IncompatibleRhsError(ValueError):
    """Neumann Poisson right side has a nonzero mean beyond the compatibility tolerance."""


def _check_backend(backend: str):
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}, expected one of {BACKENDS}")


# ---------------------------------------------------------------------------
# direct backend: eigen-decomposition by fast transforms
# ---------------------------------------------------------------------------

def _dirichlet_node_eigs(n: int, h: float) -> np.ndarray:
    # modes sin(k pi i / n) on interior nodes i = 1..n-1
    k = np.arange(1, n)
    return (4.0 / (h * h)) * np.sin(np.pi * k / (2 * n)) ** 2


def _dirichlet_cell_eigs(n: int, h: float) -> np.ndarray:
    # modes sin(k pi (j + 1/2) / n) on cells, odd ghosts across the walls
    k = np.arange(1, n + 1)
    return (4.0 / (h * h)) * np.sin(np.pi * k / (2 * n)) ** 2


def _neumann_cell_eigs(n: int, h: float) -> np.ndarray:
    # modes cos(k pi (j + 1/2) / n) on cells, even ghosts; k = 0 is the null mode
    k = np.arange(n)
    return (4.0 / (h * h)) * np.sin(np.pi * k / (2 * n)) ** 2


def _helmholtz_direct_u(rhs: np.ndarray, grid: Grid, alpha: float, nu: float) -> np.ndarray:
    lam = alpha + nu * (
        _dirichlet_node_eigs(grid.nx, grid.hx)[:, None]
        + _dirichlet_cell_eigs(grid.ny, grid.hy)[None, :]
    )
    r = fft.dst(fft.dst(rhs[1:-1, :], type=1, axis=0), type=2, axis=1)
    w = fft.idst(fft.idst(r / lam, type=2, axis=1), type=1, axis=0)
    out = np.zeros_like(rhs)
    out[1:-1, :] = w
    return out


def _helmholtz_direct_v(rhs: np.ndarray, grid: Grid, alpha: float, nu: float) -> np.ndarray:
    lam = alpha + nu * (
        _dirichlet_cell_eigs(grid.nx, grid.hx)[:, None]
        + _dirichlet_node_eigs(grid.ny, grid.hy)[None, :]
    )
    r = fft.dst(fft.dst(rhs[:, 1:-1], type=1, axis=1), type=2, axis=0)
    w = fft.idst(fft.idst(r / lam, type=2, axis=0), type=1, axis=1)
    out = np.zeros_like(rhs)
    out[:, 1:-1] = w
    return out


def _poisson_direct(rhs: np.ndarray, grid: Grid) -> np.ndarray:
    lam = (
        _neumann_cell_eigs(grid.nx, grid.hx)[:, None]
        + _neumann_cell_eigs(grid.ny, grid.hy)[None, :]
    )
    lam[0, 0] = 1.0  # null mode, coefficient forced to zero below
    phat = fft.dctn(rhs, type=2) / lam
    phat[0, 0] = 0.0
    phi = fft.idctn(phat, type=2)
    return phi - phi.mean()


# ---------------------------------------------------------------------------
# cg backend: matrix-free conjugate gradient
# ---------------------------------------------------------------------------

def _cg(apply_op, rhs: np.ndarray, dot, tol: Tolerances) -> tuple[np.ndarray, int, float]:
    """Plain CG from x0 = 0. The operator diagonal is constant, so no preconditioner."""
    x = np.zeros_like(rhs)
    r = rhs.copy()
    rr = dot(r, r)
    target = tol.threshold(np.sqrt(rr))
    if np.sqrt(rr) <= target:
        return x, 0, np.sqrt(rr)
    p = r.copy()
    for it in range(1, tol.max_iter + 1):
        ap = apply_op(p)
        alpha = rr / dot(p, ap)
        x += alpha * p
        r -= alpha * ap
        rr_new = dot(r, r)
        if np.sqrt(rr_new) <= target:
            return x, it, np.sqrt(rr_new)
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x, tol.max_iter, np.sqrt(rr)


def _neumann_lap(p: np.ndarray, grid: Grid) -> np.ndarray:
    pe = np.pad(p, 1, mode="edge")
    return (pe[2:, 1:-1] - 2.0 * p + pe[:-2, 1:-1]) / grid.hx**2 + (
        pe[1:-1, 2:] - 2.0 * p + pe[1:-1, :-2]
    ) / grid.hy**2


# ---------------------------------------------------------------------------
# public interface
# ---------------------------------------------------------------------------

def solve_helmholtz(
    rhs: VelocityField,
    alpha: float,
    nu: float,
    tol: Tolerances = Tolerances(),
    backend: str = "direct",
) -> tuple[VelocityField, SolveReport]:
    """Solve (alpha I - nu lap) w = rhs with homogeneous Dirichlet walls.

    Boundary-normal samples of rhs are ignored (those unknowns are pinned
    to zero in the solution). Raises SolveFailure if the residual of the
    returned field exceeds tol_abs + tol_rel * |rhs|.
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if nu < 0.0:
        raise ValueError(f"nu must be nonnegative, got {nu}")
    _check_backend(backend)
    g = rhs.grid
    rhs_int = rhs.zero_normal_boundary()
    rhs_norm = norm_l2(rhs_int)

    if backend == "direct":
        wu = _helmholtz_direct_u(rhs_int.u, g, alpha, nu)
        wv = _helmholtz_direct_v(rhs_int.v, g, alpha, nu)
        w = VelocityField(g, wu, wv)
        iters = 0
    else:
        area = g.cell_area

        def dot(a, b):
            return area * float(np.sum(a * b))

        def apply_u(x):
            f = VelocityField(g, x, np.zeros((g.nx, g.ny + 1)))
            return alpha * x - laplacian_dirichlet(f, nu).u

        def apply_v(x):
            f = VelocityField(g, np.zeros((g.nx + 1, g.ny)), x)
            return alpha * x - laplacian_dirichlet(f, nu).v

        wu, iu, _ = _cg(apply_u, rhs_int.u, dot, tol)
        wv, iv, _ = _cg(apply_v, rhs_int.v, dot, tol)
        w = VelocityField(g, wu, wv).zero_normal_boundary()
        iters = iu + iv

    residual = (rhs_int - (alpha * w - laplacian_dirichlet(w, nu))).zero_normal_boundary()
    res = norm_l2(residual)
    report = SolveReport(iters, res, res <= tol.threshold(rhs_norm))
    if not report.converged:
        raise SolveFailure("helmholtz solve did not converge", report)
    return w, report


def solve_poisson_neumann(
    rhs: CellField,
    tol: Tolerances = Tolerances(),
    backend: str = "direct",
) -> tuple[CellField, SolveReport]:
    """Solve -lap phi = rhs with homogeneous Neumann walls, mean(phi) = 0.

    The pure-Neumann problem is solvable only for mean-zero rhs; a mean
    beyond compat_tol * |rhs| (plus the absolute floor tol_abs) raises
    IncompatibleRhsError. The tiny residual mean that survives is projected
    out before solving.
    """
    _check_backend(backend)
    g = rhs.grid
    rhs_norm = norm_l2_cell(rhs)
    mean = rhs.mean()
    if abs(mean) > tol.compat_tol * rhs_norm + tol.tol_abs:
        raise IncompatibleRhsError(
            f"Neumann rhs has mean {mean:.3e} with |rhs| = {rhs_norm:.3e}; "
            "the pure-Neumann problem needs a mean-zero right side"
        )
    r0 = rhs.values - mean

    if backend == "direct":
        phi = _poisson_direct(r0, g)
        iters = 0
    else:
        area = g.cell_area

        def dot(a, b):
            return area * float(np.sum(a * b))

        def apply_op(x):
            return -_neumann_lap(x, g)

        phi, iters, _ = _cg(apply_op, r0, dot, tol)
        phi = phi - phi.mean()

    out = CellField(g, phi)
    residual = CellField(g, r0 + _neumann_lap(phi, g))
    res = norm_l2_cell(residual)
    report = SolveReport(iters, res, res <= tol.threshold(rhs_norm))
    if not report.converged:
        raise SolveFailure("neumann poisson solve did not converge", report)
    return out, report
