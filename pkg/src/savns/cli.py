"""Command-line front end.

Subcommands:

    savns converge   --scheme sav1 --example 1 --dt 0.1 --dt 0.05 ... --out table.csv
    savns stability  --scheme sav2 --dt 0.5 --nx 64 --out trace.csv
    savns single     --scheme sav1 --example 2 --dt 0.0125 --out run.csv

Options may also come from a flat key = value config file (--config); any
flag given on the command line overrides the file. Recognized keys match
the long option names: mode, scheme, example, nx, dt (comma-separated
list), nu, tfinal, c0, backend, out, seed, paper_mode.

Exit status: 0 on success, 1 when a runtime invariant fails
(divergence bound, energy decay), 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .harness import (
    ConfigError,
    InvariantViolation,
    RunConfig,
    run_simulation,
)
from .linsolve import SolveFailure
from .schemes import Scheme

PAPER_GRID = 250
DEFAULT_GRID = 128


def parse_config_file(path: str) -> dict:
    """Flat key = value lines; '#' starts a comment; blank lines ignored."""
    out: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = value
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="savns",
        description="SAV pressure-correction solvers for 2D incompressible "
                    "Navier-Stokes on a staggered grid.",
        epilog=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode, blurb in (
        ("converge", "sweep a decreasing dt list and tabulate errors and rates"),
        ("stability", "zero-forcing run asserting the per-step energy decay"),
        ("single", "one run at one dt"),
    ):
        p = sub.add_parser(mode, help=blurb)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--scheme", choices=[s.value for s in Scheme], default=None,
                       help="time integrator (default sav1)")
        p.add_argument("--example", choices=["1", "2", "stability"], default=None,
                       help="manufactured case, or 'stability' for the f = 0 run")
        p.add_argument("--nx", type=int, default=None,
                       help=f"cells per axis (default {DEFAULT_GRID}, "
                            f"{PAPER_GRID} with --paper-mode)")
        p.add_argument("--dt", type=float, action="append", default=None,
                       help="time step; repeat for convergence sweeps")
        p.add_argument("--nu", type=float, default=None, help="viscosity (default 0.1)")
        p.add_argument("--tfinal", type=float, default=None,
                       help="final time and scalar decay constant (default 1)")
        p.add_argument("--c0", type=float, default=None,
                       help="energy shift of the nonlinear-scalar scheme (default 1)")
        p.add_argument("--backend", choices=["direct", "cg"], default=None,
                       help="elliptic solver backend (default direct)")
        p.add_argument("--out", default=None, help="CSV output path")
        p.add_argument("--seed", type=int, default=None,
                       help="seed of the stability initial condition (default 0)")
        p.add_argument("--paper-mode", action="store_true",
                       help=f"use the {PAPER_GRID}-cell grid of the benchmark tables")
    return parser


def _merge(args: argparse.Namespace) -> RunConfig:
    file_cfg = parse_config_file(args.config) if args.config else {}

    def pick(flag_value, key: str, default, cast):
        if flag_value is not None:
            return flag_value
        if key in file_cfg:
            return cast(file_cfg[key])
        return default

    paper = args.paper_mode or file_cfg.get("paper_mode", "").lower() in ("1", "true", "yes")
    nx = pick(args.nx, "nx", PAPER_GRID if paper else DEFAULT_GRID, int)
    dts = args.dt
    if dts is None and "dt" in file_cfg:
        dts = [float(tok) for tok in file_cfg["dt"].split(",") if tok.strip()]
    if dts is None:
        raise ConfigError("no time step given; pass --dt (repeatable) or dt = ... in the config")
    case = pick(args.example, "example", "stability" if args.mode == "stability" else "1", str)
    return RunConfig(
        mode=args.mode,
        scheme=Scheme(pick(args.scheme, "scheme", Scheme.FIRST.value, str)),
        case=case,
        nx=nx,
        dts=tuple(dts),
        nu=pick(args.nu, "nu", 0.1, float),
        t_final=pick(args.tfinal, "tfinal", 1.0, float),
        c0=pick(args.c0, "c0", 1.0, float),
        backend=pick(args.backend, "backend", "direct", str),
        out=pick(args.out, "out", None, str),
        seed=pick(args.seed, "seed", 0, int),
    )


def _print_converge(rows) -> None:
    print(f"{'dt':>12} {'e_u':>12} {'rate':>6} {'e_p':>12} {'rate':>6} "
          f"{'e_q':>12} {'rate':>6}")
    for r in rows:
        fmt_rate = lambda x: f"{x:6.2f}" if x is not None else "   ---"
        print(f"{r.dt:12.6f} {r.e_u:12.4e} {fmt_rate(r.rate_u)} "
              f"{r.e_p:12.4e} {fmt_rate(r.rate_p)} {r.e_q:12.4e} {fmt_rate(r.rate_q)}")


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _merge(args)
        result, _ = run_simulation(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (InvariantViolation, SolveFailure) as exc:
        print(f"invariant failed: {exc}", file=sys.stderr)
        return 1

    if config.mode == "converge":
        _print_converge(result)
    elif config.mode == "stability" or config.case == "stability":
        worst = max((r.violation for r in result.rows), default=0.0)
        print(f"steps: {len(result.rows)}  baseline energy: {result.e0:.6e}  "
              f"worst violation: {worst:.3e}  bound: {result.eps:.3e}  "
              f"{'PASS' if result.passed else 'FAIL'}")
        if not result.passed:
            return 1
    else:
        _print_converge([result])
    if config.out:
        print(f"wrote {config.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
