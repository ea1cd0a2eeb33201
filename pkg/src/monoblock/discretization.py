"""Implicit upwind finite differences on the rectangle, in block-line form.

The scheme for component alpha at interior point (i, j) and time level m is

    d*U_ij - l*U_(i-1)j - r*U_(i+1)j - b*U_i(j-1) - t*U_i(j+1)
        + f_alpha(x_i, y_j, t_m, U) - U_ij(t_(m-1)) / tau = 0

with coefficients built from central second differences and one-sided first
differences switched by the local velocity sign:

    l = eps/hx^2 + max(v_x, 0)/hx        r = eps/hx^2 + max(-v_x, 0)/hx
    b = eps/hy^2 + max(v_y, 0)/hy        t = eps/hy^2 + max(-v_y, 0)/hy
    d = 1/tau + l + r + b + t

All four off-diagonal coefficients stay nonnegative for any velocity sign,
which is what makes every line matrix an M-matrix with dominance margin
1/tau.

Grouping the unknowns by vertical lines (fixed i, j = 1..Ny-1) turns the
level system into a block tridiagonal one: a tridiagonal matrix A couples a
line to itself, diagonal matrices L and R couple it to its left and right
neighbors, and G* carries the boundary-data contributions. Residuals are
evaluated in that folded form: the boundary slots of the unknown are pinned
to the boundary data of the level, so constructed upper and lower solutions
keep their residual signs and iterates (whose boundaries already equal the
data) are evaluated exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocksolve import TriDiag
from .mesh import Mesh
from .reaction import ProblemSpec, g_pair


@dataclass(frozen=True)
class StencilCoeffs:
    """Interior-point coefficient arrays, shape (Nx-1, Ny-1), for one component/level."""

    l: np.ndarray
    r: np.ndarray
    b: np.ndarray
    t: np.ndarray
    d: np.ndarray


def stencil_coeffs(
    problem: ProblemSpec,
    mesh: Mesh,
    alpha: int,
    m: int,
    _flip_upwind: bool = False,
) -> StencilCoeffs:
    """Assemble the five-point coefficients for all interior points at level m.

    _flip_upwind is a test hook that deliberately applies the wrong one-sided
    difference, destroying the M-matrix property; never set it in production.
    """
    eps = problem.eps[alpha]
    tm = float(mesh.t[m])
    vx = np.broadcast_to(
        np.asarray(problem.vel[alpha][0](mesh.Xi, mesh.Yi, tm), dtype=float),
        mesh.interior_shape,
    )
    vy = np.broadcast_to(
        np.asarray(problem.vel[alpha][1](mesh.Xi, mesh.Yi, tm), dtype=float),
        mesh.interior_shape,
    )
    if not (np.all(np.isfinite(vx)) and np.all(np.isfinite(vy)) and np.isfinite(eps)):
        raise ValueError("non-finite velocity or diffusion value")
    if _flip_upwind:
        # wrong-side differences with the signed velocity: off-diagonal
        # coefficients go negative as soon as |v| h exceeds eps
        l = eps / mesh.hx**2 + np.minimum(vx, 0.0) / mesh.hx
        r = eps / mesh.hx**2 - np.maximum(vx, 0.0) / mesh.hx
        b = eps / mesh.hy**2 + np.minimum(vy, 0.0) / mesh.hy
        t = eps / mesh.hy**2 - np.maximum(vy, 0.0) / mesh.hy
    else:
        l = eps / mesh.hx**2 + np.maximum(vx, 0.0) / mesh.hx
        r = eps / mesh.hx**2 + np.maximum(-vx, 0.0) / mesh.hx
        b = eps / mesh.hy**2 + np.maximum(vy, 0.0) / mesh.hy
        t = eps / mesh.hy**2 + np.maximum(-vy, 0.0) / mesh.hy
    d = 1.0 / mesh.tau + l + r + b + t
    return StencilCoeffs(l=l, r=r, b=b, t=t, d=d)


@dataclass(frozen=True)
class LineBlockSystem:
    """One vertical line of the block form: A U_i - L U_(i-1) - R U_(i+1) + G*."""

    A: TriDiag
    L: np.ndarray
    R: np.ndarray
    gstar: np.ndarray
    i: int
    alpha: int


def assemble_line(
    problem: ProblemSpec, mesh: Mesh, alpha: int, i: int, m: int
) -> LineBlockSystem:
    if not (1 <= i <= mesh.Nx - 1):
        raise ValueError(f"line index {i} outside 1..{mesh.Nx - 1}")
    if m < 1:
        raise ValueError("line systems exist for time levels m >= 1")
    co = stencil_coeffs(problem, mesh, alpha, m)
    k = i - 1
    A = TriDiag(sub=-co.b[k, 1:], diag=co.d[k].copy(), sup=-co.t[k, :-1])
    gd = g_pair(problem, mesh, m)[alpha]
    gstar = np.zeros(mesh.Ny - 1)
    gstar[0] -= co.b[k, 0] * gd[i, 0]
    gstar[-1] -= co.t[k, -1] * gd[i, -1]
    if i == 1:
        gstar -= co.l[k] * gd[0, 1:-1]
    if i == mesh.Nx - 1:
        gstar -= co.r[k] * gd[-1, 1:-1]
    return LineBlockSystem(A=A, L=co.l[k].copy(), R=co.r[k].copy(), gstar=gstar, i=i, alpha=alpha)


def residual_line(
    problem: ProblemSpec,
    mesh: Mesh,
    alpha: int,
    i: int,
    m: int,
    U_self_triplet: tuple[np.ndarray | None, np.ndarray, np.ndarray | None],
    U_prev_line: np.ndarray,
    U_other_line: np.ndarray,
) -> np.ndarray:
    """Residual of one line, boundary values embedded through G*.

    The triplet holds the component's own lines (i-1, i, i+1); pass None for
    a neighbor that is a boundary line (its contribution lives in G*).
    """
    sys = assemble_line(problem, mesh, alpha, i, m)
    left, mid, right = U_self_triplet
    mid = np.asarray(mid, dtype=float)
    if mid.shape[0] != mesh.Ny - 1 or U_prev_line.shape[0] != mesh.Ny - 1:
        raise ValueError("line vectors must have length Ny - 1")
    out = sys.A.matvec(mid) + sys.gstar
    if i > 1:
        if left is None:
            raise ValueError("interior left neighbor required for i > 1")
        out -= sys.L * np.asarray(left, dtype=float)
    if i < mesh.Nx - 1:
        if right is None:
            raise ValueError("interior right neighbor required for i < Nx - 1")
        out -= sys.R * np.asarray(right, dtype=float)
    xi = mesh.x[i]
    yj = mesh.y[1:-1]
    tm = float(mesh.t[m])
    out += problem.reaction(alpha, xi, yj, tm, mid, np.asarray(U_other_line, dtype=float))
    out -= np.asarray(U_prev_line, dtype=float) / mesh.tau
    return out


def fold_boundary(U_field: np.ndarray, g_field: np.ndarray) -> np.ndarray:
    """Copy of U with boundary entries replaced by the level's boundary data."""
    V = np.array(U_field, dtype=float, copy=True)
    V[0, :] = g_field[0, :]
    V[-1, :] = g_field[-1, :]
    V[:, 0] = g_field[:, 0]
    V[:, -1] = g_field[:, -1]
    return V


def residual_field(
    problem: ProblemSpec,
    mesh: Mesh,
    alpha: int,
    m: int,
    U_self: np.ndarray,
    U_other: np.ndarray,
    U_prev_self: np.ndarray,
    coeffs: StencilCoeffs | None = None,
    g_field: np.ndarray | None = None,
) -> np.ndarray:
    """Whole-field residual at interior points, shape (Nx-1, Ny-1).

    Vectorized equivalent of stacking residual_line over all lines; the
    boundary slots of U_self are folded to the level's boundary data.
    """
    co = coeffs if coeffs is not None else stencil_coeffs(problem, mesh, alpha, m)
    if g_field is None:
        g_field = g_pair(problem, mesh, m)[alpha]
    V = fold_boundary(U_self, g_field)
    out = co.d * V[1:-1, 1:-1]
    out -= co.l * V[:-2, 1:-1]
    out -= co.r * V[2:, 1:-1]
    out -= co.b * V[1:-1, :-2]
    out -= co.t * V[1:-1, 2:]
    tm = float(mesh.t[m])
    out += problem.reaction(
        alpha, mesh.Xi, mesh.Yi, tm, U_self[1:-1, 1:-1], U_other[1:-1, 1:-1]
    )
    out -= U_prev_self[1:-1, 1:-1] / mesh.tau
    return out


def residual_norm(
    problem: ProblemSpec,
    mesh: Mesh,
    U: np.ndarray,
    U_prev: np.ndarray,
    m: int,
) -> float:
    """Max over components and interior points of the scheme residual at level m."""
    worst = 0.0
    for a in (0, 1):
        res = residual_field(problem, mesh, a, m, U[a], U[1 - a], U_prev[a])
        worst = max(worst, float(np.abs(res).max()))
    return worst


def stencil_violations(co: StencilCoeffs, tau: float, shift: float = 0.0) -> list[str]:
    """M-matrix audit of one component/level: sign and dominance conditions."""
    out = []
    for name, arr in (("l", co.l), ("r", co.r), ("b", co.b), ("t", co.t)):
        if np.any(arr < 0):
            out.append(f"negative off-diagonal coefficient {name}: min {arr.min():.3e}")
    if np.any(co.d + shift <= 0):
        out.append(f"nonpositive diagonal: min {(co.d + shift).min():.3e}")
    block_margin = (co.d + shift) - (co.l + co.r + co.b + co.t)
    expected = 1.0 / tau + shift
    if np.any(block_margin <= 0):
        out.append(f"lost block dominance: min margin {block_margin.min():.3e}")
    if np.any(np.abs(block_margin - expected) > 1e-9 * max(1.0, expected)):
        out.append("block dominance margin drifted from 1/tau + shift")
    return out
