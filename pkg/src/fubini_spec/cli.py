"""Command-line experiments: solve, sweep, classify, audit, thresholds, tensorcheck."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bochner, tensorlab
from .boundary import GeodesicBall, classify_ball, convexity_threshold, relaxed_threshold
from .geometry import HALF_PI, DomainError, ProjectiveModel
from .sturm import METHODS, BracketError, ConvergenceError, SolverConfig, StiffnessError, build_radial_problem, solve, sweep

COMMANDS = ("solve", "sweep", "classify", "audit", "thresholds", "tensorcheck")

SWEEP_COLUMNS = (
    "m",
    "r0",
    "lambda_dbar",
    "lambda_usual",
    "k",
    "ratio_lambda_over_k",
    "convex",
    "strongly_pseudoconvex",
    "relaxed_value",
    "relaxed_holds",
    "boundary_i",
    "rigidity",
    "bochner_residual",
    "mesh",
    "err_est",
    "method",
    "status",
)

AUDIT_TOLERANCE = 1e-6


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    m: int = 1
    r0: float | None = None
    r0_min: float | None = None
    r0_max: float | None = None
    steps: int | None = None
    mesh: int = 4096
    tol: float = 1e-12
    method: str = "fd_bisection"
    output_format: str | None = None
    output_path: Path | None = None
    seed: int = 0
    trials: int = 100
    strict: bool = False
    workers: int | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.mesh < 64 or self.mesh % 2:
            raise ConfigError("mesh must be an even integer >= 64")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        if self.command in ("solve", "classify", "audit"):
            if self.r0 is None:
                raise ConfigError(f"{self.command} requires --r0")
            _check_radius(self.r0, "r0")
        if self.command == "sweep":
            if self.r0_min is None or self.r0_max is None or self.steps is None:
                raise ConfigError("sweep requires --r0-min, --r0-max and --steps")
            _check_radius(self.r0_min, "r0-min")
            _check_radius(self.r0_max, "r0-max")
            if self.steps < 1:
                raise ConfigError("steps must be >= 1")
            if self.steps > 1 and not self.r0_min < self.r0_max:
                raise ConfigError("r0-min must be smaller than r0-max")

    @property
    def solver(self) -> SolverConfig:
        return SolverConfig(method=self.method, n_cells=self.mesh, tol=self.tol)

    def grid(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.r0_min])
        return np.linspace(self.r0_min, self.r0_max, self.steps)


def _check_radius(value: float, name: str) -> None:
    if not 0.0 < value < HALF_PI:
        raise ConfigError(f"{name} must lie in (0, pi/2), got {value!r}")


def fmt(value) -> str:
    """17 significant digits for floats, lowercase booleans, empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def sweep_rows(config: RunConfig) -> tuple[list[list], bool]:
    """Solve, classify and audit every grid radius; returns the rows and whether any failed."""
    model = ProjectiveModel(config.m)
    rows = []
    any_failed = False
    for row in sweep(model, config.grid(), config.solver, workers=config.workers):
        rep = row.report
        base = [model.m, row.r0]
        geometry = [rep.convex, rep.strongly_pseudoconvex, rep.relaxed_value, rep.relaxed_holds]
        if row.failed:
            any_failed = True
            rows.append(base + [None, None, model.k, None] + geometry + [None] * 5 + [config.method, f"failed: {row.error}"])
            continue
        eig = row.result
        aud = bochner.audit(GeodesicBall(model, row.r0), eig, tolerance=None)
        status = "ok"
        if aud.relative_residual > AUDIT_TOLERANCE:
            status = "failed: bochner residual above tolerance"
            any_failed = True
        rows.append(
            base
            + [eig.lambda_dbar, eig.lambda_usual, model.k, eig.lambda_dbar / model.k]
            + geometry
            + [aud.boundary_I, aud.rigidity, aud.residual, eig.mesh_size, eig.error_estimate, eig.method, status]
        )
    return rows, any_failed


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def execute(config: RunConfig) -> tuple[str, bool]:
    """Produce the command output text; the flag reports failed sweep rows."""
    config.validate()
    model = ProjectiveModel(config.m)
    fmt_ = config.output_format
    if config.command == "thresholds":
        values = {"m": model.m, "convexity_threshold": convexity_threshold(model), "relaxed_threshold": relaxed_threshold(model)}
        if fmt_ == "json":
            return _dump_json(values), False
        return write_csv(list(values), [list(values.values())]), False
    if config.command == "tensorcheck":
        return _dump_json(tensorlab.tensor_report(model.m, trials=config.trials, seed=config.seed)), False
    if config.command == "sweep":
        rows, failed = sweep_rows(config)
        if fmt_ == "json":
            return _dump_json([dict(zip(SWEEP_COLUMNS, r)) for r in rows]), failed
        return write_csv(SWEEP_COLUMNS, rows), failed

    ball = GeodesicBall(model, config.r0)
    if config.command == "classify":
        return _dump_json(classify_ball(ball).to_dict()), False
    eig = solve(build_radial_problem(ball), config.solver)
    if config.command == "solve":
        return _dump_json(eig.to_dict()), False
    return _dump_json(bochner.audit(ball, eig, tolerance=None).to_dict()), False


def run(config: RunConfig) -> int:
    """Execute one command, write its output and return the exit status."""
    try:
        text, failed = execute(config)
    except (ConfigError, DomainError) as exc:
        _report_error("invalid_config", exc)
        return 2
    except (ConvergenceError, BracketError, StiffnessError) as exc:
        _report_error("solver_failure", exc)
        return 1
    if config.output_path is None:
        sys.stdout.write(text)
    else:
        config.output_path.parent.mkdir(parents=True, exist_ok=True)
        config.output_path.write_text(text, encoding="utf-8", newline="\n")
    if failed and config.strict:
        _report_error("row_failure", RuntimeError("one or more sweep rows failed"))
        return 1
    return 0


def _report_error(kind: str, exc: Exception) -> None:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fubini-spec",
        description="First Dirichlet eigenvalue of geodesic balls in CP^m and its Bochner audit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, radius=False, solver=False):
        p.add_argument("--m", type=int, default=1, help="complex dimension (default 1)")
        if radius:
            p.add_argument("--r0", type=float, required=True, help="ball radius in (0, pi/2)")
        if solver:
            p.add_argument("--mesh", type=int, default=4096, help="cells (FD) or samples (shooting)")
            p.add_argument("--tol", type=float, default=1e-12)
            p.add_argument("--method", choices=METHODS, default="fd_bisection")
        p.add_argument("--format", dest="output_format", choices=("csv", "json"), default=None)
        p.add_argument("--output", dest="output_path", type=Path, default=None, help="write here instead of stdout")

    common(sub.add_parser("solve", help="first eigenpair as JSON"), radius=True, solver=True)
    p = sub.add_parser("sweep", help="CSV sweep over an inclusive uniform radius grid")
    common(p, solver=True)
    p.add_argument("--r0-min", type=float, required=True)
    p.add_argument("--r0-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--strict", action="store_true", help="nonzero exit if any row fails")
    p.add_argument("--workers", type=int, default=None, help="parallel rows (default: FUBINI_SPEC_THREADS or 1)")
    common(sub.add_parser("classify", help="boundary convexity report as JSON"), radius=True)
    common(sub.add_parser("audit", help="Bochner identity audit as JSON"), radius=True, solver=True)
    common(sub.add_parser("thresholds", help="convexity and relaxed-condition radii"))
    p = sub.add_parser("tensorcheck", help="coordinate-level Hessian identity report")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    return parser


def parse_config(argv=None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    return RunConfig(**ns)


def main(argv=None) -> int:
    return run(parse_config(argv))


if __name__ == "__main__":
    raise SystemExit(main())
