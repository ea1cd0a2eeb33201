"""Brute-force verification oracle and convergence-order estimation.

The oracle re-derives the discrete equations from scratch with scalar
loops and a dense Newton solve per time level. It shares no assembly code
with the production path on purpose: agreement between the two routes is
the check. Keep it that way; do not refactor the loops onto the stencil
helpers.

Intended for small meshes only (the dense Jacobian is 2 (Nx-1)(Ny-1)
square).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, MeshSpec, build_mesh
from .reaction import ProblemSpec


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-12
    max_iter: int = 50

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


def dense_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense linear solve used by the oracle and by small assembly checks."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if b.shape[0] != A.shape[0]:
        raise ValueError("right-hand side length must match the matrix")
    return np.linalg.solve(A, b)


def _upwind_coeffs(problem, a, hx, hy, x, y, t):
    vx = float(problem.vel[a][0](x, y, t))
    vy = float(problem.vel[a][1](x, y, t))
    eps = problem.eps[a]
    l = eps / hx**2 + max(vx, 0.0) / hx
    r = eps / hx**2 + max(-vx, 0.0) / hx
    b = eps / hy**2 + max(vy, 0.0) / hy
    t_ = eps / hy**2 + max(-vy, 0.0) / hy
    return l, r, b, t_


def oracle_residual(
    problem: ProblemSpec,
    mesh: Mesh,
    m: int,
    U: np.ndarray,
    U_prev: np.ndarray,
) -> np.ndarray:
    """Flat residual vector of the level-m equations, scalar-loop assembly."""
    Nx, Ny = mesh.Nx, mesh.Ny
    ni, nj = Nx - 1, Ny - 1
    tm = float(mesh.t[m])
    inv_tau = 1.0 / mesh.tau
    F = np.zeros(2 * ni * nj)
    for a in (0, 1):
        for i in range(1, Nx):
            for j in range(1, Ny):
                x, y = float(mesh.x[i]), float(mesh.y[j])
                l, r, b, t_ = _upwind_coeffs(problem, a, mesh.hx, mesh.hy, x, y, tm)
                d = inv_tau + l + r + b + t_
                row = a * ni * nj + (i - 1) * nj + (j - 1)
                acc = d * U[a, i, j]
                acc -= l * U[a, i - 1, j]
                acc -= r * U[a, i + 1, j]
                acc -= b * U[a, i, j - 1]
                acc -= t_ * U[a, i, j + 1]
                acc += float(problem.f[a](x, y, tm, U[0, i, j], U[1, i, j]))
                acc -= inv_tau * U_prev[a, i, j]
                F[row] = acc
    return F


def oracle_jacobian(
    problem: ProblemSpec,
    mesh: Mesh,
    m: int,
    U: np.ndarray,
) -> np.ndarray:
    """Dense Jacobian of oracle_residual at U (analytic derivatives)."""
    Nx, Ny = mesh.Nx, mesh.Ny
    ni, nj = Nx - 1, Ny - 1
    tm = float(mesh.t[m])
    inv_tau = 1.0 / mesh.tau
    n = 2 * ni * nj
    J = np.zeros((n, n))
    for a in (0, 1):
        for i in range(1, Nx):
            for j in range(1, Ny):
                x, y = float(mesh.x[i]), float(mesh.y[j])
                l, r, b, t_ = _upwind_coeffs(problem, a, mesh.hx, mesh.hy, x, y, tm)
                d = inv_tau + l + r + b + t_
                row = a * ni * nj + (i - 1) * nj + (j - 1)
                J[row, row] = d + float(
                    problem.df_own[a](x, y, tm, U[0, i, j], U[1, i, j])
                )
                if i > 1:
                    J[row, row - nj] = -l
                if i < Nx - 1:
                    J[row, row + nj] = -r
                if j > 1:
                    J[row, row - 1] = -b
                if j < Ny - 1:
                    J[row, row + 1] = -t_
                cross = (1 - a) * ni * nj + (i - 1) * nj + (j - 1)
                J[row, cross] = float(
                    problem.df_cross[a](x, y, tm, U[0, i, j], U[1, i, j])
                )
    return J


def newton_solve_level(
    problem: ProblemSpec,
    mesh: Mesh,
    prev: np.ndarray,
    m: int,
    config: NewtonConfig | None = None,
) -> np.ndarray:
    """Solve the level-m equations by damped dense Newton from the prev field."""
    config = config or NewtonConfig()
    Nx, Ny = mesh.Nx, mesh.Ny
    ni, nj = Nx - 1, Ny - 1
    tm = float(mesh.t[m])
    U = np.array(prev, dtype=float, copy=True)
    for a in (0, 1):
        g = problem.g[a]
        U[a, 0, :] = g(mesh.X[0, :], mesh.Y[0, :], tm)
        U[a, -1, :] = g(mesh.X[-1, :], mesh.Y[-1, :], tm)
        U[a, :, 0] = g(mesh.X[:, 0], mesh.Y[:, 0], tm)
        U[a, :, -1] = g(mesh.X[:, -1], mesh.Y[:, -1], tm)

    def put(U, delta):
        V = np.array(U, copy=True)
        for a in (0, 1):
            V[a, 1:-1, 1:-1] += delta[a * ni * nj : (a + 1) * ni * nj].reshape(ni, nj)
        return V

    F = oracle_residual(problem, mesh, m, U, prev)
    norm = float(np.abs(F).max())
    for _ in range(config.max_iter):
        if norm <= config.tol:
            return U
        J = oracle_jacobian(problem, mesh, m, U)
        step = dense_solve(J, -F)
        trial = put(U, step)
        F_trial = oracle_residual(problem, mesh, m, trial, prev)
        norm_trial = float(np.abs(F_trial).max())
        if norm_trial > norm:
            # fall back to a half step once; these problems are mild and a
            # single cut is enough in practice
            trial = put(U, 0.5 * step)
            F_trial = oracle_residual(problem, mesh, m, trial, prev)
            norm_trial = float(np.abs(F_trial).max())
        U, F, norm = trial, F_trial, norm_trial
    if norm <= config.tol:
        return U
    raise OracleError(f"Newton stalled at level {m}: residual {norm:.3e}")


def newton_march(
    problem: ProblemSpec,
    mesh: Mesh,
    config: NewtonConfig | None = None,
) -> np.ndarray:
    """Level-by-level Newton trajectory, shape (Nt+1, 2, Nx+1, Ny+1)."""
    from .reaction import psi_pair

    out = np.empty((mesh.Nt + 1, 2, mesh.Nx + 1, mesh.Ny + 1))
    out[0] = psi_pair(problem, mesh)
    for m in range(1, mesh.Nt + 1):
        out[m] = newton_solve_level(problem, mesh, out[m - 1], m, config)
    return out


def convergence_order(hs, taus, errors) -> tuple[float, float]:
    """Least-squares error slopes against h and against tau.

    Returns (space_order, time_order); with tau proportional to h^p the two
    differ by the factor p. Needs at least 3 mesh levels.
    """
    hs = np.asarray(hs, dtype=float)
    taus = np.asarray(taus, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if hs.size < 3 or taus.size != hs.size or errors.size != hs.size:
        raise ValueError("need at least 3 matching (h, tau, error) mesh levels")
    if np.any(errors <= 0.0):
        raise ValueError("errors must be positive to take logarithms")
    space = float(np.polyfit(np.log(hs), np.log(errors), 1)[0])
    time = float(np.polyfit(np.log(taus), np.log(errors), 1)[0])
    return space, time


@dataclass(frozen=True)
class RegimeResult:
    hs: tuple
    taus: tuple
    errors: tuple
    space_order: float
    time_order: float
    n_iters_total: int


def manufactured_regime(
    regime: str,
    n_values=(8, 16, 32),
    delta: float = 1e-10,
    problem_kwargs: dict | None = None,
) -> RegimeResult:
    """Solve the manufactured problem on a mesh sequence and fit the orders.

    "upwind": mixed-sign velocities, tau = h/2, T = 0.5 (first order).
    "central": zero velocities, tau = 4 h^2, T = 0.25 (second order).
    problem_kwargs may adjust eps/sigma/scale; the regime owns the velocity.
    """
    from .models import manufactured_bracket, manufactured_problem
    from .monotone import SweepVariant, TimeStepPolicy, march

    kwargs = dict(problem_kwargs or {})
    kwargs.pop("vel", None)

    if regime == "upwind":
        vel = ((1.0, -0.75), (0.8, 0.6))
        T = 0.5

        def nt_of(n):
            return n  # tau = h/2
    elif regime == "central":
        vel = ((0.0, 0.0), (0.0, 0.0))
        T = 0.25

        def nt_of(n):
            if n * n % 16:
                raise ValueError("central regime needs n divisible by 4")
            return n * n // 16  # tau = 4 h^2
    else:
        raise ValueError("regime must be 'upwind' or 'central'")

    problem, exact = manufactured_problem(vel=vel, **kwargs)
    hs, taus, errors = [], [], []
    iters = 0
    for n in n_values:
        mesh = build_mesh(MeshSpec(1.0, 1.0, T, n, n, nt_of(n)))
        bracket = manufactured_bracket(problem, mesh, exact)
        result = march(
            problem,
            mesh,
            SweepVariant.jacobi(),
            TimeStepPolicy(delta=delta),
            bracket,
        )
        final = result.solution(mesh.Nt)
        err = float(np.abs(final - exact(mesh.X, mesh.Y, T)).max())
        hs.append(mesh.hx)
        taus.append(mesh.tau)
        errors.append(err)
        iters += sum(result.report.n_per_level)
    space, time = convergence_order(hs, taus, errors)
    return RegimeResult(
        hs=tuple(hs),
        taus=tuple(taus),
        errors=tuple(errors),
        space_order=space,
        time_order=time,
        n_iters_total=iters,
    )
