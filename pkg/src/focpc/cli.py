"""Command-line driver: ``focpc solve | ml | switch-time | validate``.

Exit codes: 0 success, 1 usage or validation failure, 2 sweep did not
converge, 3 solver divergence.  ``FOCPC_LOG=off|info|debug`` sets the log
level (default ``off``).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from focpc import special_functions as sf
from focpc.errors import DivergenceError, FocpError
from focpc.grid import TimeGrid, check_order
from focpc.pmp import ProblemSpec, SweepOptions, SweepResult, forward_backward_sweep
from focpc.resource_example import ResourceParams, make_mayer_spec, switch_time
from focpc.validation import FAMILIES, run_checks

log = logging.getLogger("focpc")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_DIVERGED = 3

LOG_LEVELS = {"off": logging.CRITICAL + 1, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    problem: str = "resource"
    alpha: float = 0.5
    T: float = 2.0
    x0: float = 1.0
    n_steps: int = 2000
    max_iters: int = 500
    tol: float = 1e-6
    relaxation: float = 0.5
    output: str = "solution.csv"

    def validate(self) -> RunConfig:
        if self.problem not in PROBLEMS:
            raise UsageError(f"unknown problem {self.problem!r}; choose from {', '.join(PROBLEMS)}")
        try:
            check_order(self.alpha)
        except FocpError as exc:
            raise UsageError(f"--alpha: {exc}") from None
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise UsageError(f"--n must be an integer >= 2, got {self.n_steps!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise UsageError(f"--max-iters must be a positive integer, got {self.max_iters!r}")
        if not self.tol > 0:
            raise UsageError(f"--tol must be positive, got {self.tol!r}")
        if not 0 <= self.relaxation < 1:
            raise UsageError(f"--relaxation must lie in [0, 1), got {self.relaxation!r}")
        return replace(self, n_steps=int(self.n_steps), max_iters=int(self.max_iters))


@dataclass(frozen=True)
class RegisteredProblem:
    build: Callable[[RunConfig], ProblemSpec]
    report: Optional[Callable[[RunConfig, SweepResult], list[str]]] = None


def _build_resource(cfg: RunConfig) -> ProblemSpec:
    try:
        return make_mayer_spec(ResourceParams(cfg.alpha, cfg.T, cfg.x0))
    except FocpError as exc:
        raise UsageError(str(exc)) from None


def detect_switch(result: SweepResult) -> Optional[int]:
    """Index of the first node where the (first) control component drops below 0.5."""
    below = np.flatnonzero(result.control.values[:, 0] < 0.5)
    return int(below[0]) if below.size else None


def _report_resource(cfg: RunConfig, result: SweepResult) -> list[str]:
    ts = switch_time(ResourceParams(cfg.alpha, cfg.T, cfg.x0))
    k = detect_switch(result)
    h = result.control.grid.h
    if k is None:
        return [f"analytic switch t* = {ts:.15g}", "detected switch: none"]
    tk = result.control.t[k]
    return [
        f"analytic switch t* = {ts:.15g}",
        f"detected switch node {k} at t = {tk:.15g} ({(tk - ts) / h:+.2f} cells)",
    ]


PROBLEMS: dict[str, RegisteredProblem] = {
    "resource": RegisteredProblem(_build_resource, _report_resource),
}


def _fmt(v: float) -> str:
    return f"{v:.15g}"


def write_csv(path: Path, result: SweepResult) -> None:
    """One row per node: ``t, u, x_1..x_d, p_1..p_d`` (15 significant digits, LF)."""
    m = result.control.dim
    d = result.state.dim
    header = ["t"] + (["u"] if m == 1 else [f"u_{i + 1}" for i in range(m)])
    header += [f"x_{i + 1}" for i in range(d)] + [f"p_{i + 1}" for i in range(d)]
    rows = np.hstack([result.control.t[:, None], result.control.values, result.state.values, result.adjoint.values])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v + 0.0) for v in row])


def run_solve(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    cfg = cfg.validate()
    entry = PROBLEMS[cfg.problem]
    spec = entry.build(cfg)
    grid = TimeGrid(spec.t0, spec.tf, cfg.n_steps)
    opts = SweepOptions(max_iters=cfg.max_iters, tol=cfg.tol, relaxation=cfg.relaxation)
    try:
        result = forward_backward_sweep(spec, grid, opts)
    except DivergenceError as exc:
        print(f"error: solver diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    write_csv(Path(cfg.output), result)
    print(f"alpha = {cfg.alpha:g}", file=out)
    print(f"cost = {result.cost:.15g}", file=out)
    print(f"iterations = {result.iterations}", file=out)
    print(f"converged = {str(result.converged).lower()}", file=out)
    if entry.report is not None:
        for line in entry.report(cfg, result):
            print(line, file=out)
    print(f"wrote {cfg.output}", file=out)
    if not result.converged:
        print(
            f"error: sweep did not converge in {cfg.max_iters} iterations "
            f"(last control change {result.control_change_norm:.3e})",
            file=sys.stderr,
        )
        return EXIT_NOT_CONVERGED
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="focpc", description="Fractional optimal control toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = RunConfig()
    p = sub.add_parser(
        "solve",
        help="solve a registered problem by forward-backward sweep",
    )
    # defaults are applied after merging with --config, so argparse sees None
    p.add_argument("--config", type=Path, help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--problem", default=None, help=f"registered problem name [default: {d.problem}]")
    p.add_argument("--alpha", type=float, default=None, help=f"fractional order in (0, 1] (dimensionless) [default: {d.alpha}]")
    p.add_argument("--alphas", default=None, help="comma-separated orders; one run and one output file per order")
    p.add_argument("--T", type=float, default=None, help=f"horizon length (time units) [default: {d.T}]")
    p.add_argument("--x0", type=float, default=None, help=f"initial state (state units) [default: {d.x0}]")
    p.add_argument("--n", dest="n_steps", type=int, default=None, help=f"number of time steps [default: {d.n_steps}]")
    p.add_argument("--max-iters", type=int, default=None, help=f"sweep iteration cap [default: {d.max_iters}]")
    p.add_argument("--tol", type=float, default=None, help=f"sup-norm control change for convergence (control units) [default: {d.tol}]")
    p.add_argument("--relaxation", type=float, default=None, help=f"weight on the previous control, in [0, 1) [default: {d.relaxation}]")
    p.add_argument("--output", default=None, help=f"CSV output path [default: {d.output}]")

    m = sub.add_parser("ml", help="evaluate the Mittag-Leffler function E_{alpha,beta}(z)")
    m.add_argument("--alpha", type=float, default=1.0, help="first parameter, >= 0 (dimensionless) [default: 1.0]")
    m.add_argument("--beta", type=float, default=1.0, help="second parameter, >= 0 (dimensionless) [default: 1.0]")
    m.add_argument("--z", type=float, default=0.0, help="real argument, |z| <= 50 (dimensionless) [default: 0.0]")
    m.add_argument("--tol", type=float, default=1e-14, help="absolute series truncation tolerance [default: 1e-14]")

    s = sub.add_parser("switch-time", help="analytic switching time of the resource problem")
    s.add_argument("--alpha", type=float, default=0.5, help="fractional order in (0, 1] [default: 0.5]")
    s.add_argument("--T", type=float, default=2.0, help="horizon length (time units) [default: 2.0]")

    v = sub.add_parser("validate", help="run the fractional-calculus property suite")
    v.add_argument(
        "--only",
        action="append",
        choices=list(FAMILIES),
        help="restrict to one property family (repeatable) [default: all]",
    )
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(data)
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    return RunConfig(**values)


def _per_alpha_output(output: str, alpha: float) -> str:
    path = Path(output)
    return str(path.with_name(f"{path.stem}_alpha{alpha:g}{path.suffix}"))


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    if args.alphas is None:
        return run_solve(cfg)
    try:
        alphas = [float(a) for a in args.alphas.split(",") if a.strip()]
    except ValueError:
        raise UsageError(f"--alphas must be a comma-separated list of numbers, got {args.alphas!r}") from None
    if not alphas:
        raise UsageError("--alphas is empty")
    status = EXIT_OK
    for a in alphas:
        run_cfg = replace(cfg, alpha=a, output=_per_alpha_output(cfg.output, a))
        status = max(status, run_solve(run_cfg))
    return status


def cmd_ml(args: argparse.Namespace) -> int:
    try:
        value = sf.mittag_leffler(sf.MLParams(args.alpha, args.beta, args.tol), args.z)
    except FocpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(_fmt(value))
    return EXIT_OK


def cmd_switch_time(args: argparse.Namespace) -> int:
    try:
        ts = switch_time(ResourceParams(args.alpha, args.T))
    except FocpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(_fmt(ts))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    results = run_checks(args.only)
    for r in results:
        print(r.line())
    failed = [f"{r.family}: {r.name}" for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} propert{'y' if len(failed) == 1 else 'ies'} failed:")
        for name in failed:
            print(f"  {name}")
        return EXIT_USAGE
    print(f"all {len(results)} properties passed")
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "ml": cmd_ml,
    "switch-time": cmd_switch_time,
    "validate": cmd_validate,
}


def configure_logging() -> None:
    level_name = os.environ.get("FOCPC_LOG", "off").strip().lower()
    level = LOG_LEVELS.get(level_name)
    if level is None:
        print(f"warning: FOCPC_LOG={level_name!r} not one of off|info|debug; using off", file=sys.stderr)
        level = LOG_LEVELS["off"]
    logging.basicConfig(format="[%(levelname)s] %(name)s: %(message)s", level=level, stream=sys.stderr)
    logging.getLogger("focpc").setLevel(level)


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
