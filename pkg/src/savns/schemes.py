"""Time integrators: SAV pressure-correction steps and their energy functionals.

Three schemes share one splitting idea. Each step solves two Helmholtz
problems, one carrying the previous velocity / pressure / forcing and one
carrying the explicit convection term, then determines the auxiliary
scalar so that its evolution equation holds with the reconstructed
velocity, and finally projects onto discretely divergence-free fields:

  * first order:       backward Euler + standard pressure increment,
  * second order:      BDF2 + rotational pressure increment (the update
                       subtracts nu div(u~) and accumulates it in g),
  * nonlinear scalar:  first-order splitting where the multiplier is
                       q / sqrt(E(u) + C0) and the scalar satisfies a
                       quadratic equation instead of a linear one.

The auxiliary scalar q tracks exp(-t / T) for the first two schemes and
sqrt(E(u(t)) + C0) for the third. Each step consumes a state and returns a
fresh state, so states are plain immutable-by-convention values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .grid import CellField, Grid, VelocityField
from .linsolve import SolveReport, Tolerances, solve_helmholtz, solve_poisson_neumann
from .operators import (
    convect,
    divergence,
    gradient,
    inner,
    norm_h1_semi,
    norm_l2,
    norm_l2_cell,
)

ForcingEvaluator = Callable[[Grid, float], VelocityField]


class Scheme(str, Enum):
    FIRST = "sav1"
    SECOND_ROTATIONAL = "sav2"
    NONLINEAR_SCALAR = "sav3"


class SingularScalarError(ArithmeticError):
    """The linear equation for the auxiliary scalar has a vanishing coefficient."""


class NoRealRootError(ArithmeticError):
    """The scalar quadratic of the nonlinear-scalar scheme has no real root."""


class MissingHistoryError(ValueError):
    """A BDF2 step was requested without u and q history."""


@dataclass(frozen=True)
class SchemeParams:
    """Time-stepping parameters. t_final doubles as the decay constant of q."""

    nu: float
    t_final: float
    dt: float
    scheme: Scheme = Scheme.FIRST
    c0: float = 1.0
    tol: Tolerances = Tolerances()
    backend: str = "direct"

    def __post_init__(self):
        if self.nu <= 0.0 or self.t_final <= 0.0 or self.dt <= 0.0:
            raise ValueError("nu, t_final and dt must be positive")
        if self.dt > self.t_final:
            raise ValueError(f"dt = {self.dt} exceeds t_final = {self.t_final}")
        if self.c0 <= 0.0:
            raise ValueError("c0 must be positive")


@dataclass
class SolverState:
    """Full stepper state at time t.

    u_prev / q_prev hold the previous step (needed by BDF2); g is the
    rotational accumulator g^{n+1} = g^n + nu div(u~), zero until a
    rotational step runs.
    """

    t: float
    u: VelocityField
    p: CellField
    q: float
    u_prev: Optional[VelocityField] = None
    q_prev: Optional[float] = None
    g: Optional[CellField] = None

    def grid(self) -> Grid:
        return self.u.grid


@dataclass(frozen=True)
class StepDiagnostics:
    """Per-step observables: the scalar, dissipation rate, energy, divergence."""

    s: float
    grad_tilde_norm_sq: float
    energy: float
    div_max: float
    div_tol: float
    u_tilde: VelocityField


def initial_state(
    grid: Grid,
    params: SchemeParams,
    u0: Optional[VelocityField] = None,
    p0: Optional[CellField] = None,
) -> SolverState:
    """State at t = 0. q0 is 1 (= exp(0)) except for the nonlinear-scalar
    scheme, where it is sqrt(E(u0) + C0)."""
    u = u0.copy() if u0 is not None else VelocityField.zeros(grid)
    p = p0.copy() if p0 is not None else CellField.zeros(grid)
    p = p - CellField(grid, np.full((grid.nx, grid.ny), p.mean()))
    if params.scheme is Scheme.NONLINEAR_SCALAR:
        q0 = math.sqrt(0.5 * inner(u, u) + params.c0)
    else:
        q0 = 1.0
    return SolverState(t=0.0, u=u, p=p, q=q0, g=CellField.zeros(grid))


def _recenter(p: CellField) -> CellField:
    return CellField(p.grid, p.values - p.values.mean())


def project(
    u_tilde: VelocityField,
    scale: float,
    tol: Tolerances = Tolerances(),
    backend: str = "direct",
) -> tuple[VelocityField, CellField, SolveReport]:
    """Remove the gradient part of u_tilde.

    Solves lap(phi) = scale * div(u_tilde) with Neumann walls and returns
    (u_tilde - gradient(phi) / scale, phi, poisson report). On the MAC grid
    div(gradient(.)) equals the Neumann Laplacian exactly, so the result is
    divergence-free to solver accuracy.
    """
    d = divergence(u_tilde)
    rhs = -scale * d
    phi, report = solve_poisson_neumann(rhs, tol=tol, backend=backend)
    u = u_tilde - (1.0 / scale) * gradient(phi)
    return u, phi, report


def solve_sav_scalar(q_n: float, t_next: float, dt: float, T: float,
                     b1: float, b2: float) -> float:
    """Closed-form scalar solve of the first-order scheme.

    b1 and b2 are the inner products of the convection field with the two
    velocity components of the splitting. Returns S with q = exp(-t/T) S.
    """
    ep = math.exp(t_next / T)
    em = math.exp(-t_next / T)
    coeff = ((T + dt) / (T * dt) - ep * ep * b2) * em
    rhs = ep * b1 + q_n / dt
    if abs(coeff) < 1e-14 * max(1.0, abs(rhs)):
        raise SingularScalarError(
            f"scalar coefficient {coeff:.3e} vanishes at t = {t_next} (b2 = {b2:.3e})"
        )
    return rhs / coeff


def solve_sav_scalar_bdf2(q_n: float, q_prev: float, t_next: float, dt: float,
                          T: float, b1: float, b2: float) -> float:
    """BDF2 analogue of solve_sav_scalar."""
    ep = math.exp(t_next / T)
    em = math.exp(-t_next / T)
    coeff = (3.0 / (2.0 * dt) + 1.0 / T) * em - ep * b2
    rhs = ep * b1 + (4.0 * q_n - q_prev) / (2.0 * dt)
    if abs(coeff) < 1e-14 * max(1.0, abs(rhs)):
        raise SingularScalarError(
            f"scalar coefficient {coeff:.3e} vanishes at t = {t_next} (b2 = {b2:.3e})"
        )
    return rhs / coeff


def _forcing(force: Optional[ForcingEvaluator], grid: Grid, t: float) -> Optional[VelocityField]:
    return force(grid, t) if force is not None else None


def step_scheme1(
    state: SolverState,
    params: SchemeParams,
    force: Optional[ForcingEvaluator] = None,
) -> tuple[SolverState, StepDiagnostics]:
    """One step of the first-order pressure-correction scheme."""
    dt, T, nu = params.dt, params.t_final, params.nu
    t1 = state.t + dt
    alpha = 1.0 / dt

    rhs1 = alpha * state.u - gradient(state.p)
    f = _forcing(force, state.grid(), t1)
    if f is not None:
        rhs1 = rhs1 + f
    ut1, _ = solve_helmholtz(rhs1, alpha, nu, tol=params.tol, backend=params.backend)

    conv = convect(state.u, state.u)
    ut2, _ = solve_helmholtz(-conv, alpha, nu, tol=params.tol, backend=params.backend)

    b1 = inner(conv, ut1)
    b2 = inner(conv, ut2)
    s = solve_sav_scalar(state.q, t1, dt, T, b1, b2)

    u_tilde = ut1 + s * ut2
    u_new, phi, rep = project(u_tilde, alpha, tol=params.tol, backend=params.backend)
    p_new = _recenter(state.p + phi)
    q_new = math.exp(-t1 / T) * s

    new = SolverState(t=t1, u=u_new, p=p_new, q=q_new,
                      u_prev=state.u, q_prev=state.q, g=state.g)
    diag = StepDiagnostics(
        s=s,
        grad_tilde_norm_sq=norm_h1_semi(u_tilde) ** 2,
        energy=modified_energy1(new, params),
        div_max=float(np.abs(divergence(u_new).values).max()),
        div_tol=params.tol.threshold(norm_l2_cell(alpha * divergence(u_tilde))),
        u_tilde=u_tilde,
    )
    return new, diag


def step_scheme2(
    state: SolverState,
    params: SchemeParams,
    force: Optional[ForcingEvaluator] = None,
) -> tuple[SolverState, StepDiagnostics]:
    """One step of the second-order rotational pressure-correction scheme.

    Needs one step of history; the caller bootstraps with step_scheme1.
    """
    if state.u_prev is None or state.q_prev is None:
        raise MissingHistoryError("BDF2 step needs u_prev and q_prev; "
                                  "take the first step with step_scheme1")
    dt, T, nu = params.dt, params.t_final, params.nu
    t1 = state.t + dt
    alpha = 3.0 / (2.0 * dt)

    u_bar = 2.0 * state.u - state.u_prev

    rhs1 = (1.0 / (2.0 * dt)) * (4.0 * state.u - state.u_prev) - gradient(state.p)
    f = _forcing(force, state.grid(), t1)
    if f is not None:
        rhs1 = rhs1 + f
    ut1, _ = solve_helmholtz(rhs1, alpha, nu, tol=params.tol, backend=params.backend)

    conv = convect(u_bar, u_bar)
    ut2, _ = solve_helmholtz(-conv, alpha, nu, tol=params.tol, backend=params.backend)

    b1 = inner(conv, ut1)
    b2 = inner(conv, ut2)
    s = solve_sav_scalar_bdf2(state.q, state.q_prev, t1, dt, T, b1, b2)

    u_tilde = ut1 + s * ut2
    div_tilde = divergence(u_tilde)
    u_new, psi, rep = project(u_tilde, alpha, tol=params.tol, backend=params.backend)
    p_new = _recenter(state.p + psi - nu * div_tilde)
    g_prev = state.g if state.g is not None else CellField.zeros(state.grid())
    g_new = g_prev + nu * div_tilde
    q_new = math.exp(-t1 / T) * s

    new = SolverState(t=t1, u=u_new, p=p_new, q=q_new,
                      u_prev=state.u, q_prev=state.q, g=g_new)
    diag = StepDiagnostics(
        s=s,
        grad_tilde_norm_sq=norm_h1_semi(u_tilde) ** 2,
        energy=modified_energy2(new, params),
        div_max=float(np.abs(divergence(u_new).values).max()),
        div_tol=params.tol.threshold(norm_l2_cell(alpha * div_tilde)),
        u_tilde=u_tilde,
    )
    return new, diag


def _quadratic_root_near(a: float, b: float, c: float, q_ref: float) -> float:
    """Real root of a q^2 + b q + c = 0 closest to q_ref; ties pick the
    more positive root. Degenerate cases fall back to the linear equation."""
    scale = max(abs(a) * max(1.0, q_ref * q_ref), abs(b) * max(1.0, abs(q_ref)), abs(c), 1.0)
    if abs(a) < 1e-14 * scale:
        if abs(b) < 1e-14 * scale:
            if abs(c) < 1e-14 * scale:
                return q_ref  # identically satisfied, keep the trajectory continuous
            raise NoRealRootError(f"degenerate scalar equation: a={a:.3e} b={b:.3e} c={c:.3e}")
        return -c / b
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise NoRealRootError(
            f"negative discriminant {disc:.3e} for coefficients a={a:.6e} b={b:.6e} c={c:.6e}"
        )
    sq = math.sqrt(disc)
    # numerically stable pair of roots
    if b >= 0.0:
        qq = -0.5 * (b + sq)
    else:
        qq = -0.5 * (b - sq)
    r1 = qq / a
    r2 = c / qq if qq != 0.0 else r1
    d1, d2 = abs(r1 - q_ref), abs(r2 - q_ref)
    if d1 < d2:
        return r1
    if d2 < d1:
        return r2
    return max(r1, r2)


def step_scheme3(
    state: SolverState,
    params: SchemeParams,
    force: Optional[ForcingEvaluator] = None,
) -> tuple[SolverState, StepDiagnostics]:
    """One step of the nonlinear-scalar comparison scheme.

    Same splitting as the first-order scheme, but the two components are
    projected separately and the scalar comes from a quadratic equation
    (the multiplier is theta = q / sqrt(E(u) + C0)).
    """
    dt, T, nu = params.dt, params.t_final, params.nu
    t1 = state.t + dt
    alpha = 1.0 / dt

    rhs1 = alpha * state.u - gradient(state.p)
    f = _forcing(force, state.grid(), t1)
    if f is not None:
        rhs1 = rhs1 + f
    ut1, _ = solve_helmholtz(rhs1, alpha, nu, tol=params.tol, backend=params.backend)

    conv = convect(state.u, state.u)
    ut2, _ = solve_helmholtz(-conv, alpha, nu, tol=params.tol, backend=params.backend)

    u1, phi1, rep1 = project(ut1, alpha, tol=params.tol, backend=params.backend)
    u2, phi2, rep2 = project(ut2, alpha, tol=params.tol, backend=params.backend)

    energy_n = 0.5 * inner(state.u, state.u)
    s_fac = 1.0 / math.sqrt(energy_n + params.c0)

    # 2 q (q - q_n)/dt = ((u_new - u_n)/dt + theta conv, u_tilde), theta = q s_fac
    adv = alpha * (u1 - state.u)
    bvec = alpha * u2 + conv
    a = 2.0 * alpha - s_fac * s_fac * inner(bvec, ut2)
    b = -2.0 * alpha * state.q - s_fac * (inner(adv, ut2) + inner(bvec, ut1))
    c = -inner(adv, ut1)
    q_new = _quadratic_root_near(a, b, c, state.q)
    theta = q_new * s_fac

    u_tilde = ut1 + theta * ut2
    u_new = u1 + theta * u2
    p_new = _recenter(state.p + phi1 + theta * phi2)

    new = SolverState(t=t1, u=u_new, p=p_new, q=q_new,
                      u_prev=state.u, q_prev=state.q, g=state.g)
    div_rhs_norm = max(
        norm_l2_cell(alpha * divergence(ut1)),
        norm_l2_cell(alpha * divergence(ut2)),
    )
    diag = StepDiagnostics(
        s=theta,
        grad_tilde_norm_sq=norm_h1_semi(u_tilde) ** 2,
        energy=state_energy(new, params),
        div_max=float(np.abs(divergence(u_new).values).max()),
        div_tol=params.tol.threshold(div_rhs_norm) * (1.0 + abs(theta)),
        u_tilde=u_tilde,
    )
    return new, diag


def step(
    state: SolverState,
    params: SchemeParams,
    force: Optional[ForcingEvaluator] = None,
) -> tuple[SolverState, StepDiagnostics]:
    """Advance one step with the scheme selected in params.

    The rotational scheme bootstraps its missing history with a
    first-order step.
    """
    if params.scheme is Scheme.FIRST:
        return step_scheme1(state, params, force)
    if params.scheme is Scheme.SECOND_ROTATIONAL:
        if state.u_prev is None or state.q_prev is None:
            return step_scheme1(state, params, force)
        return step_scheme2(state, params, force)
    return step_scheme3(state, params, force)


def modified_energy1(state: SolverState, params: SchemeParams) -> float:
    """|u|^2 + q^2 + dt^2 |grad p|^2, the first-order Lyapunov functional."""
    gp = gradient(state.p)
    return inner(state.u, state.u) + state.q**2 + params.dt**2 * inner(gp, gp)


def modified_energy2(state: SolverState, params: SchemeParams) -> float:
    """The rotational-scheme Lyapunov functional (needs one step of history)."""
    if state.u_prev is None or state.q_prev is None or state.g is None:
        raise MissingHistoryError("rotational energy needs u_prev, q_prev and g")
    two_u = 2.0 * state.u - state.u_prev
    gh = gradient(state.p + state.g)
    return (
        inner(state.u, state.u)
        + inner(two_u, two_u)
        + (4.0 / 3.0) * params.dt**2 * inner(gh, gh)
        + (2.0 / params.nu) * params.dt * inner_cell_sq(state.g)
        + state.q**2
        + (2.0 * state.q - state.q_prev) ** 2
    )


def inner_cell_sq(p: CellField) -> float:
    return norm_l2_cell(p) ** 2


def state_energy(state: SolverState, params: SchemeParams) -> float:
    """Energy diagnostic matching the scheme: the first-order functional for
    sav1/sav3 (q^2 tracks the shifted kinetic energy for sav3), the
    rotational functional for sav2 once history exists."""
    if params.scheme is Scheme.SECOND_ROTATIONAL and state.u_prev is not None:
        return modified_energy2(state, params)
    if params.scheme is Scheme.NONLINEAR_SCALAR:
        return inner(state.u, state.u) + state.q**2
    return modified_energy1(state, params)
