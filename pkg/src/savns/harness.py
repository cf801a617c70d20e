"""Run orchestration: error norms, convergence tables, energy traces, CSV.

Two run protocols:

  * manufactured-solution runs measure, at every step, the discrete L2
    velocity error, the mean-adjusted pressure error, and the scalar error
    against its exact trajectory; a convergence study sweeps a decreasing
    dt list and appends observed rates.
  * stability runs integrate with zero forcing from a divergence-free
    initial field and record the per-step decay of the scheme's modified
    energy; the violation column is dE + 2 nu dt |grad u~|^2, which must
    stay below 1e-8 times the baseline energy for every assessed step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import mms
from .grid import CellField, Grid, VelocityField
from .linsolve import Tolerances
from .operators import inner, norm_l2, norm_l2_cell
from .schemes import (
    Scheme,
    SchemeParams,
    SolverState,
    initial_state,
    modified_energy1,
    modified_energy2,
    state_energy,
    step,
)

CONVERGE_HEADER = "dt,e_u,rate_u,e_p,rate_p,e_q,rate_q"
STABILITY_HEADER = "n,t,energy,dissipation,violation"


class ConfigError(ValueError):
    """A run configuration failed validation before any compute."""


class InvariantViolation(RuntimeError):
    """A runtime invariant (divergence bound, energy decay) failed during a run."""


@dataclass
class RunConfig:
    mode: str  # converge | stability | single
    scheme: Scheme = Scheme.FIRST
    case: str = "1"  # "1" | "2" | "stability"
    nx: int = 128
    ny: Optional[int] = None
    dts: tuple[float, ...] = (0.1,)
    nu: float = 0.1
    t_final: float = 1.0
    c0: float = 1.0
    backend: str = "direct"
    out: Optional[str] = None
    seed: int = 0
    ic_amplitude: float = 1.0
    eps_factor: float = 1e-8
    tol: Tolerances = field(default_factory=Tolerances)

    def validate(self) -> None:
        if self.mode not in ("converge", "stability", "single"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.nx < 2 or (self.ny is not None and self.ny < 2):
            raise ConfigError("grid needs at least 2 cells per axis")
        if not self.dts:
            raise ConfigError("at least one dt is required")
        for dt in self.dts:
            if dt <= 0 or dt > self.t_final:
                raise ConfigError(f"dt = {dt} outside (0, t_final]")
            n = self.t_final / dt
            if abs(n - round(n)) > 1e-9 * max(1.0, round(n)):
                raise ConfigError(f"t_final/dt = {n} is not an integer for dt = {dt}")
        if self.mode == "converge":
            if len(self.dts) < 2:
                raise ConfigError("a convergence study needs at least two dt values")
            if any(b >= a for a, b in zip(self.dts, self.dts[1:])):
                raise ConfigError("dt list must be strictly decreasing")
            if self.case == "stability":
                raise ConfigError("convergence studies need a manufactured case")
        if self.mode == "stability":
            if self.case != "stability":
                raise ConfigError("stability mode runs with case='stability' (f = 0)")
            if self.scheme is Scheme.NONLINEAR_SCALAR:
                raise ConfigError(
                    "the nonlinear-scalar scheme has no per-step decay bound to assert; "
                    "use sav1 or sav2 in stability mode"
                )
        if self.mode == "single" and len(self.dts) != 1:
            raise ConfigError("single mode takes exactly one dt")

    def grid(self) -> Grid:
        return Grid(nx=self.nx, ny=self.ny if self.ny is not None else self.nx)

    def params(self, dt: float) -> SchemeParams:
        return SchemeParams(
            nu=self.nu, t_final=self.t_final, dt=dt, scheme=self.scheme,
            c0=self.c0, tol=self.tol, backend=self.backend,
        )


@dataclass(frozen=True)
class ErrorReport:
    """Per-run error norms: max-over-time L2 velocity error, time-L2
    pressure error (both pressures mean-adjusted), max scalar error."""

    e_u_linf: float
    e_p_l2: float
    e_q_linf: float


@dataclass(frozen=True)
class EnergyRow:
    n: int
    t: float
    energy: float
    dissipation: float
    violation: float


@dataclass
class EnergyTrace:
    rows: list[EnergyRow]
    e0: float
    eps: float

    @property
    def passed(self) -> bool:
        return all(r.violation <= self.eps for r in self.rows)


@dataclass(frozen=True)
class ConvergenceRow:
    dt: float
    e_u: float
    rate_u: Optional[float]
    e_p: float
    rate_p: Optional[float]
    e_q: float
    rate_q: Optional[float]


def rates(errors: list[float], dts: list[float]) -> list[float]:
    """Observed orders: log(e_{k-1}/e_k) / log(dt_{k-1}/dt_k)."""
    if len(errors) != len(dts) or len(errors) < 2:
        raise ValueError("need matching error/dt lists with at least two entries")
    if any(e <= 0 for e in errors):
        raise ValueError("rates are undefined for zero or negative errors")
    return [
        math.log(errors[k - 1] / errors[k]) / math.log(dts[k - 1] / dts[k])
        for k in range(1, len(errors))
    ]


def _exact_scalar(scheme: Scheme, case, grid: Grid, params: SchemeParams, t: float,
                  u_exact: VelocityField) -> float:
    if scheme is Scheme.NONLINEAR_SCALAR:
        return math.sqrt(0.5 * inner(u_exact, u_exact) + params.c0)
    return math.exp(-t / params.t_final)


def _check_divergence(diag, n: int):
    if diag.div_max > 10.0 * diag.div_tol:
        raise InvariantViolation(
            f"step {n}: max divergence {diag.div_max:.3e} exceeds "
            f"10 x solver tolerance {diag.div_tol:.3e}"
        )


def run_mms(config: RunConfig, dt: float) -> tuple[SolverState, ErrorReport]:
    """Integrate one manufactured case at one dt, sampling errors each step."""
    grid = config.grid()
    params = config.params(dt)
    case = mms.get_case(config.case, nu=config.nu)
    u0, p0 = mms.sample_on_grid(case, grid, 0.0)
    state = initial_state(grid, params, u0=u0, p0=p0)

    def force(g: Grid, t: float) -> VelocityField:
        return mms.forcing_field(case, g, t)

    n_steps = round(config.t_final / dt)
    e_u = 0.0
    e_q = abs(state.q - _exact_scalar(config.scheme, case, grid, params, 0.0, u0))
    e_p_sq = 0.0
    for n in range(1, n_steps + 1):
        state, diag = step(state, params, force)
        _check_divergence(diag, n)
        u_ex, p_ex = mms.sample_on_grid(case, grid, state.t)
        e_u = max(e_u, norm_l2(state.u - u_ex))
        p_num = state.p - CellField(grid, np.full((grid.nx, grid.ny), state.p.mean()))
        e_p_sq += norm_l2_cell(p_num - p_ex) ** 2
        e_q = max(e_q, abs(state.q - _exact_scalar(config.scheme, case, grid, params,
                                                   state.t, u_ex)))
    return state, ErrorReport(e_u_linf=e_u, e_p_l2=math.sqrt(dt * e_p_sq), e_q_linf=e_q)


def run_stability(config: RunConfig, dt: float) -> tuple[SolverState, EnergyTrace]:
    """Zero-forcing run recording the modified-energy decay.

    For the rotational scheme the first step is the first-order bootstrap,
    so the trace baseline is the state after that step; decay is asserted
    for every genuine BDF2 step.
    """
    grid = config.grid()
    params = config.params(dt)
    ic = mms.stability_ic(grid, seed=config.seed, amplitude=config.ic_amplitude)
    state = initial_state(grid, params, u0=ic)
    n_steps = round(config.t_final / dt)

    rows: list[EnergyRow] = []
    if config.scheme is Scheme.FIRST:
        e_prev = modified_energy1(state, params)
        rows.append(EnergyRow(0, 0.0, e_prev, 0.0, 0.0))
        first_assessed = 1
    else:
        state, diag = step(state, params, None)  # first-order bootstrap
        _check_divergence(diag, 1)
        e_prev = modified_energy2(state, params)
        rows.append(EnergyRow(1, state.t, e_prev, 0.0, 0.0))
        first_assessed = 2

    e0 = e_prev
    eps = config.eps_factor * e0
    trace = EnergyTrace(rows, e0, eps)
    for n in range(first_assessed, n_steps + 1):
        state, diag = step(state, params, None)
        _check_divergence(diag, n)
        energy = state_energy(state, params)
        dissipation = 2.0 * config.nu * dt * diag.grad_tilde_norm_sq
        violation = energy - e_prev + dissipation
        rows.append(EnergyRow(n, state.t, energy, dissipation, violation))
        if violation > eps:
            raise InvariantViolation(
                f"step {n}: energy decay violated, dE + dissipation = {violation:.3e} "
                f"> eps = {eps:.3e}"
            )
        e_prev = energy
    return state, trace


def convergence_study(config: RunConfig) -> list[ConvergenceRow]:
    """One row per dt with errors and observed rates.

    Also enforces the sanity invariant that halving dt never increases the
    velocity error by more than 5 percent.
    """
    config.validate()
    reports = [run_mms(config, dt)[1] for dt in config.dts]
    eu = [r.e_u_linf for r in reports]
    ep = [r.e_p_l2 for r in reports]
    eq = [r.e_q_linf for r in reports]
    dts = list(config.dts)
    ru = [None] + rates(eu, dts)
    rp = [None] + rates(ep, dts)
    rq = [None] + rates(eq, dts)
    for k in range(1, len(dts)):
        if abs(dts[k] / dts[k - 1] - 0.5) < 1e-12 and eu[k] > 1.05 * eu[k - 1]:
            raise InvariantViolation(
                f"velocity error grew from {eu[k - 1]:.3e} to {eu[k]:.3e} "
                f"when dt halved to {dts[k]}"
            )
    return [
        ConvergenceRow(dts[k], eu[k], ru[k], ep[k], rp[k], eq[k], rq[k])
        for k in range(len(dts))
    ]


def stability_study(config: RunConfig) -> EnergyTrace:
    config.validate()
    _, trace = run_stability(config, config.dts[0])
    return trace


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.12e}"


def write_convergence_csv(path: str, rows: list[ConvergenceRow]) -> None:
    lines = [CONVERGE_HEADER]
    for r in rows:
        lines.append(",".join([
            _fmt(r.dt), _fmt(r.e_u), _fmt(r.rate_u),
            _fmt(r.e_p), _fmt(r.rate_p), _fmt(r.e_q), _fmt(r.rate_q),
        ]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_stability_csv(path: str, trace: EnergyTrace) -> None:
    lines = [STABILITY_HEADER]
    for r in trace.rows:
        lines.append(",".join([
            str(r.n), _fmt(r.t), _fmt(r.energy), _fmt(r.dissipation), _fmt(r.violation),
        ]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def run_simulation(config: RunConfig):
    """Dispatch on mode; writes the CSV report when an output path is set.

    Returns (rows, None) for converge mode, (trace, None) for stability,
    and (row, final_state) for single mode.
    """
    config.validate()
    if config.mode == "converge":
        rows = convergence_study(config)
        if config.out:
            write_convergence_csv(config.out, rows)
        return rows, None
    if config.mode == "stability":
        trace = stability_study(config)
        if config.out:
            write_stability_csv(config.out, trace)
        return trace, None
    dt = config.dts[0]
    if config.case == "stability":
        state, trace = run_stability(config, dt)
        if config.out:
            write_stability_csv(config.out, trace)
        return trace, state
    state, report = run_mms(config, dt)
    row = ConvergenceRow(dt, report.e_u_linf, None, report.e_p_l2, None,
                         report.e_q_linf, None)
    if config.out:
        write_convergence_csv(config.out, [row])
    return row, state
