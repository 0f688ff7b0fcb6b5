"""First Dirichlet eigenvalue of a geodesic ball as a radial Sturm-Liouville problem.

The radial part of the usual Laplacian on CP^m is ``-(w u')'/w`` with the
volume density ``w(r) = sin^(2m-1) r cos r``. The first Dirichlet eigenfunction
of a geodesic ball is radial, so its eigenvalue ``Lambda`` solves

    -(w u')' = Lambda w u  on (0, r0),   u regular at 0,   u(r0) = 0.

Eigenvalues of the dbar-Laplacian are half of these.

Two independent solvers are provided: a flux-form finite-difference pencil
solved by Sturm-sequence bisection (:func:`solve_fd`) and a Pruefer-phase
shooting method (:func:`solve_shooting`).
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded
from scipy.special import jn_zeros

from .boundary import BoundaryReport, GeodesicBall, classify_ball
from .geometry import HALF_PI, ProjectiveModel, ball_volume_fraction, radial_drift, volume_density_unchecked

METHODS = ("fd_bisection", "shooting")
THREADS_ENV = "FUBINI_SPEC_THREADS"
_EPS = np.finfo(float).eps


class ConvergenceError(RuntimeError):
    """Bisection did not reach the requested width within the iteration cap."""

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(f"{message} (bracket [{bracket[0]!r}, {bracket[1]!r}])")
        self.bracket = bracket


class BracketError(RuntimeError):
    pass


class StiffnessError(RuntimeError):
    pass


class AccuracyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class RadialProblem:
    ball: GeodesicBall

    @property
    def model(self) -> ProjectiveModel:
        return self.ball.model

    @property
    def r0(self) -> float:
        return self.ball.r0

    @property
    def m(self) -> int:
        return self.ball.m

    def weight(self, r):
        return volume_density_unchecked(self.model, r)

    def drift(self, r):
        return radial_drift(self.model, r)

    def weight_integral(self, a, b):
        """Exact integral of the weight over ``[a, b]``."""
        return ball_volume_fraction(self.model, b) - ball_volume_fraction(self.model, a)

    def euclidean_bound(self) -> float:
        """``j_{m-1,1}^2 / r0^2``: the flat-ball eigenvalue, an upper bound here."""
        j = jn_zeros(self.m - 1, 1)[0]
        return j * j / self.r0**2


def build_radial_problem(ball: GeodesicBall) -> RadialProblem:
    return RadialProblem(ball)


@dataclass
class EigenResult:
    lambda_dbar: float
    lambda_usual: float
    r: np.ndarray
    u: np.ndarray
    mesh_size: int
    error_estimate: float
    method: str
    extras: dict = field(default_factory=dict)

    @property
    def eigenfunction(self) -> tuple[np.ndarray, np.ndarray]:
        return self.r, self.u

    def is_single_signed(self) -> bool:
        interior = self.u[1:-1]
        return bool(np.all(interior > 0.0) or np.all(interior < 0.0))

    def to_dict(self, include_eigenfunction: bool = True) -> dict:
        out = {
            "lambda_dbar": self.lambda_dbar,
            "lambda_usual": self.lambda_usual,
            "mesh_size": self.mesh_size,
            "error_estimate": self.error_estimate,
            "method": self.method,
        }
        if include_eigenfunction:
            out["eigenfunction"] = {"r": self.r.tolist(), "u": self.u.tolist()}
        return out


def _make_result(lam_usual, r, u, mesh_size, err, method, **extras) -> EigenResult:
    return EigenResult(
        lambda_dbar=0.5 * lam_usual,
        lambda_usual=lam_usual,
        r=r,
        u=u,
        mesh_size=mesh_size,
        error_estimate=err,
        method=method,
        extras=extras,
    )


# -- finite differences ------------------------------------------------------


def assemble_pencil(problem: RadialProblem, n_cells: int):
    """Flux-form stiffness and lumped mass for nodes ``r_i = i h``, ``i < n_cells``.

    Returns ``(r, diag, off, mass)`` where the stiffness matrix is tridiagonal
    with ``diag`` and ``off`` and the mass matrix is ``diag(mass)``. The flux
    through ``r = 0`` is zero because the weight vanishes there; the node at
    ``r0`` is eliminated by the Dirichlet condition.
    """
    h = problem.r0 / n_cells
    r = np.arange(n_cells + 1) * h
    mid = (np.arange(n_cells) + 0.5) * h
    flux = problem.weight(mid) / h
    diag = flux.copy()
    diag[1:] += flux[:-1]
    off = -flux[:-1]
    lower = np.concatenate(([0.0], mid[:-1]))
    mass = problem.weight_integral(lower, mid)
    return r, diag, off, mass


def sturm_count(diag, off, mass, shift: float) -> int:
    """Number of eigenvalues of the pencil below ``shift``.

    Counts negative pivots in the LDL^T factorization of ``K - shift M``;
    by Sylvester's law of inertia this equals the number of generalized
    eigenvalues less than ``shift``.
    """
    d = (diag - shift * mass).tolist()
    o2 = (off * off).tolist()
    count = 0
    p = d[0]
    if p < 0.0:
        count += 1
    tiny = 1e-300
    for i in range(1, len(d)):
        if p == 0.0:
            p = tiny
        p = d[i] - o2[i - 1] / p
        if p < 0.0:
            count += 1
    return count


def _bisect_first(diag, off, mass, lo, hi, tol, max_iter):
    if sturm_count(diag, off, mass, hi) < 1:
        hi *= 4.0
        if sturm_count(diag, off, mass, hi) < 1:
            raise BracketError(f"no eigenvalue below {hi!r} after widening")
    for _ in range(max_iter):
        if hi - lo <= max(tol, 8.0 * _EPS * hi):
            return lo, hi
        mid = 0.5 * (lo + hi)
        if sturm_count(diag, off, mass, mid) >= 1:
            hi = mid
        else:
            lo = mid
    if hi - lo <= max(tol, 8.0 * _EPS * hi):
        return lo, hi
    raise ConvergenceError("Sturm bisection did not converge", (lo, hi))


def _inverse_iteration(diag, off, mass, shift, sweeps=3):
    # equilibrate with M^(-1/2): the raw pencil rows near r = 0 are tiny and
    # spoil pivoting, the symmetrized matrix has entries of order 1/h^2
    s = 1.0 / np.sqrt(mass)
    sym_off = off * s[:-1] * s[1:]
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = sym_off
    ab[1] = diag * s * s - shift
    ab[2, :-1] = sym_off
    y = 1.0 / s
    for _ in range(sweeps):
        y = solve_banded((1, 1), ab, y)
        y /= np.max(np.abs(y))
    return y * s


def _fd_eigenpair(problem, n_cells, tol, max_iter):
    r, diag, off, mass = assemble_pencil(problem, n_cells)
    lo, hi = _bisect_first(diag, off, mass, 0.0, 4.0 * problem.euclidean_bound(), tol, max_iter)
    lam = 0.5 * (lo + hi)
    x = _inverse_iteration(diag, off, mass, lam * (1.0 - 1e-10))
    u = np.append(x, 0.0)
    u /= u[0]
    return lam, r, u


def solve_fd(
    problem: RadialProblem,
    n_cells: int = 4096,
    tol: float = 1e-12,
    max_iter: int = 200,
    target_error: float | None = None,
) -> EigenResult:
    """Finite-difference eigenpair with Richardson extrapolation.

    The pencil is solved on ``n_cells/2``, ``n_cells`` and ``2 n_cells``
    cells. The reported eigenvalue and eigenfunction extrapolate the last
    two; ``error_estimate`` is the change between the extrapolants of the
    (n/2, n) and (n, 2n) pairs.
    """
    if n_cells < 64 or n_cells % 2:
        raise ValueError(f"n_cells must be an even integer >= 64, got {n_cells!r}")
    lam_half, _, _ = _fd_eigenpair(problem, n_cells // 2, tol, max_iter)
    lam_c, r, u_c = _fd_eigenpair(problem, n_cells, tol, max_iter)
    lam_f, _, u_f = _fd_eigenpair(problem, 2 * n_cells, tol, max_iter)
    lam = (4.0 * lam_f - lam_c) / 3.0
    lam_prev = (4.0 * lam_c - lam_half) / 3.0
    u = (4.0 * u_f[::2] - u_c) / 3.0
    err = abs(lam - lam_prev)
    if target_error is not None and err > target_error:
        warnings.warn(
            f"eigenvalue error estimate {err:.3g} exceeds requested {target_error:.3g}",
            AccuracyWarning,
            stacklevel=2,
        )
    return _make_result(
        lam, r, u, n_cells, err, "fd_bisection", mesh_eigenvalues=(lam_half, lam_c, lam_f)
    )


# -- shooting ----------------------------------------------------------------


def _series_start(problem: RadialProblem, lam: float):
    eps = max(1e-6, problem.r0 * 1e-6)
    m = problem.m
    u = 1.0 - lam * eps * eps / (4.0 * m)
    du = -lam * eps / (2.0 * m)
    return eps, u, du


def _phase_rhs(problem: RadialProblem, sigma: float):
    a = 2 * problem.m - 1

    def rhs(r, y):
        t = math.tan(r)
        drift = a / t - t
        s, c = math.sin(y[0]), math.cos(y[0])
        return [sigma + drift * s * c, -drift * c * c]

    return rhs


def _integrate_phase(problem, lam, rtol, dense=False):
    """Integrate the scaled Pruefer system ``u = rho sin(theta)``, ``u' = sqrt(lam) rho cos(theta)``."""
    sigma = math.sqrt(lam)
    eps, u, du = _series_start(problem, lam)
    theta0 = math.atan2(sigma * u, du)
    rho0 = math.log(math.hypot(u, du / sigma))
    sol = solve_ivp(
        _phase_rhs(problem, sigma),
        (eps, problem.r0),
        [theta0, rho0],
        method="DOP853",
        rtol=rtol,
        atol=rtol * 1e-2,
        dense_output=dense,
    )
    if sol.status != 0:
        raise StiffnessError(
            f"phase integration failed at r0={problem.r0!r}: {sol.message}; "
            "retry with a smaller series offset or a tighter tolerance"
        )
    return sol


def _boundary_phase(problem, lam, rtol) -> float:
    return float(_integrate_phase(problem, lam, rtol).y[0, -1])


def solve_shooting(
    problem: RadialProblem,
    tol: float = 1e-12,
    n_samples: int = 4096,
    max_iter: int = 200,
) -> EigenResult:
    """Pruefer-phase shooting with bisection on the boundary phase.

    The phase starts near pi/2 (``u(0) = 1``, ``u'(0) = 0``) and the first
    Dirichlet eigenvalue is the unique ``Lambda`` with boundary phase pi;
    zeros of ``u`` are exactly the crossings of multiples of pi, so the
    boundary phase is monotone in ``Lambda`` across that level.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    rtol = max(tol, 1e-13)
    target = math.pi

    def above(lam):
        return _boundary_phase(problem, lam, rtol) >= target

    lo = 0.0
    hi = 4.0 * problem.euclidean_bound()
    if not above(hi):
        hi *= 4.0
        if not above(hi):
            raise BracketError(f"boundary phase does not reach pi below Lambda={hi!r}")
    for _ in range(max_iter):
        if hi - lo <= tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if above(mid):
            hi = mid
        else:
            lo = mid
    else:
        raise ConvergenceError("shooting bisection did not converge", (lo, hi))
    lam = 0.5 * (lo + hi)

    # integrator error mapped to the eigenvalue through the phase slope
    dlam = 1e-6 * lam
    slope = (_boundary_phase(problem, lam + dlam, rtol) - _boundary_phase(problem, lam - dlam, rtol)) / (2 * dlam)
    dtheta = abs(_boundary_phase(problem, lam, rtol) - _boundary_phase(problem, lam, 100 * rtol))
    err = (hi - lo) + (dtheta / slope if slope > 0 else math.inf)

    sol = _integrate_phase(problem, lam, rtol, dense=True)
    eps, _, _ = _series_start(problem, lam)
    r = np.linspace(0.0, problem.r0, n_samples + 1)
    u = np.empty_like(r)
    inner = r < eps
    u[inner] = 1.0 - lam * r[inner] ** 2 / (4.0 * problem.m)
    theta, logrho = sol.sol(r[~inner])
    u[~inner] = np.exp(logrho) * np.sin(theta)
    u[-1] = 0.0
    return _make_result(lam, r, u, n_samples, err, "shooting", boundary_phase_slope=slope)


# -- sweeps ------------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    method: str = "fd_bisection"
    n_cells: int = 4096
    tol: float = 1e-12

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.n_cells < 64:
            raise ValueError("mesh must have at least 64 cells")


def solve(problem: RadialProblem, config: SolverConfig = SolverConfig()) -> EigenResult:
    if config.method == "fd_bisection":
        return solve_fd(problem, n_cells=config.n_cells, tol=config.tol)
    return solve_shooting(problem, tol=config.tol, n_samples=config.n_cells)


@dataclass
class SweepRow:
    r0: float
    result: EigenResult | None
    report: BoundaryReport
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.result is None


def _sweep_row(args) -> SweepRow:
    model, r0, config = args
    ball = GeodesicBall(model, r0)
    report = classify_ball(ball)
    try:
        result = solve(build_radial_problem(ball), config)
    except (ConvergenceError, BracketError, StiffnessError, FloatingPointError) as exc:
        return SweepRow(r0, None, report, f"{type(exc).__name__}: {exc}")
    return SweepRow(r0, result, report)


def default_workers() -> int:
    """Worker cap from ``FUBINI_SPEC_THREADS`` (default 1, i.e. serial)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def sweep(
    model: ProjectiveModel,
    r0_grid,
    config: SolverConfig = SolverConfig(),
    workers: int | None = None,
) -> list[SweepRow]:
    """Solve and classify every radius of a strictly increasing grid.

    Rows come back in grid order whatever the number of workers. Solver
    failures mark the row instead of aborting the sweep.
    """
    grid = np.asarray(r0_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("r0 grid must be a non-empty 1-d array")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("r0 grid must be strictly increasing")
    if grid[0] <= 0.0 or grid[-1] >= HALF_PI:
        raise ValueError("r0 grid must lie inside (0, pi/2)")
    workers = default_workers() if workers is None else max(1, workers)
    jobs = [(model, float(r0), config) for r0 in grid]
    if workers == 1 or len(jobs) == 1:
        return [_sweep_row(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_sweep_row, jobs))
