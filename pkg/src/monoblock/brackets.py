"""Constructive initial upper and lower solutions, level by level.

Three recipes cover the bundled models and most user problems:

* zero lower: psi at the initial level, identically zero afterwards; valid
  when the data are nonnegative and the reaction is nonpositive at zero
  (paired with the companion upper member's range in the nonincreasing
  case).
* linear upper: solve the reaction-free scheme with a constant source M
  that dominates -f from below; the solution majorizes every scheme
  solution and its nonlinear residual is nonnegative.
* constant upper: psi at the initial level, then the constant K, valid when
  K dominates the data and f is nonnegative at K with the class-appropriate
  partner argument.

The enzyme-style auxiliary construction reuses the linear recipe for
component 1 and a constant cap for component 2.

Preconditions are enforced by sampling; a failed sample refuses the
construction with a diagnostic instead of returning an invalid bracket.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import stencil_coeffs
from .mesh import Mesh
from .reaction import ProblemSpec, QuasiMonotoneClass, g_pair, psi_pair

_TOL = 1e-12


class ConstructionError(ValueError):
    """A construction precondition failed on sampled data."""


@dataclass(frozen=True)
class ConstructionRule:
    kind: str  # zero_lower | linear_upper | constant_upper | auxiliary_linear_upper
    K: tuple | None = None
    M: tuple | None = None
    M0: float | None = None


def zero_lower_rule() -> ConstructionRule:
    return ConstructionRule(kind="zero_lower")


def linear_upper_rule(M: tuple[float, float] | None = None) -> ConstructionRule:
    return ConstructionRule(kind="linear_upper", M=None if M is None else tuple(M))


def constant_upper_rule(K: tuple[float, float]) -> ConstructionRule:
    return ConstructionRule(kind="constant_upper", K=tuple(K))


def auxiliary_upper_rule(M0: float, K2: float) -> ConstructionRule:
    """Linear construction with source M0 for component 1, constant K2 for component 2."""
    return ConstructionRule(kind="auxiliary_linear_upper", M0=float(M0), K=(None, float(K2)))


@dataclass(frozen=True)
class Bracket:
    """Explicit per-level trajectories, shape (Nt+1, 2, Nx+1, Ny+1) each."""

    upper: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        if self.upper.shape != self.lower.shape or self.upper.ndim != 4:
            raise ValueError("bracket trajectories must share shape (Nt+1, 2, Nx+1, Ny+1)")


def _g_trajectory(problem: ProblemSpec, mesh: Mesh) -> np.ndarray:
    return np.stack([g_pair(problem, mesh, m) for m in range(mesh.Nt + 1)])


def _data_checks(problem: ProblemSpec, mesh: Mesh, psi: np.ndarray, gtr: np.ndarray):
    bmask = mesh.boundary_mask()
    worst = float(-psi.min())
    if worst > _TOL:
        raise ConstructionError(f"initial data dips below zero by {worst:.3e}")
    worst = float(-gtr[:, :, bmask].min())
    if worst > _TOL:
        raise ConstructionError(f"boundary data dips below zero by {worst:.3e}")


def lower_zero(
    problem: ProblemSpec,
    mesh: Mesh,
    m: int,
    other_max: tuple[float, float] | None = None,
) -> np.ndarray:
    """Lower start at level m: psi when m = 0, zero otherwise.

    Validity needs nonnegative data and f_alpha <= 0 at zero own value; the
    nonincreasing pairing samples the other component across [0, other_max]
    (companion upper member's range; defaults to the data magnitude).
    """
    psi = psi_pair(problem, mesh)
    gtr = _g_trajectory(problem, mesh)
    _data_checks(problem, mesh, psi, gtr)
    zero = np.zeros_like(psi)
    noninc = problem.kind is QuasiMonotoneClass.NONINCREASING
    if other_max is None:
        cap = max(1.0, float(psi.max()), float(gtr.max()))
        other_max = (cap, cap)
    for level in range(1, mesh.Nt + 1):
        t = float(mesh.t[level])
        for a in (0, 1):
            if noninc:
                others = np.linspace(0.0, other_max[1 - a], 3)
            else:
                others = np.array([0.0])
            for val in others:
                other = np.full(mesh.field_shape, val)
                worst = float(problem.reaction(a, mesh.X, mesh.Y, t, zero[a], other).max())
                if worst > _TOL:
                    raise ConstructionError(
                        f"f_{a + 1}(0, {val:g}) = {worst:.3e} > 0 at t={t:g}; "
                        "zero lower solution refused"
                    )
    return psi if m == 0 else zero


def _lower_zero_trajectory(
    problem: ProblemSpec, mesh: Mesh, other_max: tuple[float, float] | None
) -> np.ndarray:
    out = np.empty((mesh.Nt + 1, 2) + mesh.field_shape)
    out[0] = lower_zero(problem, mesh, 0, other_max)
    zero = np.zeros((2,) + mesh.field_shape)
    for m in range(1, mesh.Nt + 1):
        out[m] = zero
    return out


def _solve_linear_level(
    problem: ProblemSpec,
    mesh: Mesh,
    alpha: int,
    m: int,
    prev_field: np.ndarray,
    source: float,
) -> np.ndarray:
    """Solve one level of the reaction-free scheme with a constant source.

    Dense elimination; intended for construction-time use at desk scale.
    """
    co = stencil_coeffs(problem, mesh, alpha, m)
    nx, ny = mesh.interior_shape
    n = nx * ny
    idx = np.arange(n).reshape(nx, ny)
    A = np.zeros((n, n))
    A[idx, idx] = co.d
    A[idx[1:, :], idx[:-1, :]] = -co.l[1:, :]
    A[idx[:-1, :], idx[1:, :]] = -co.r[:-1, :]
    A[idx[:, 1:], idx[:, :-1]] = -co.b[:, 1:]
    A[idx[:, :-1], idx[:, 1:]] = -co.t[:, :-1]
    gd = g_pair(problem, mesh, m)[alpha]
    rhs = np.full(mesh.interior_shape, float(source))
    rhs += prev_field[1:-1, 1:-1] / mesh.tau
    rhs[0, :] += co.l[0, :] * gd[0, 1:-1]
    rhs[-1, :] += co.r[-1, :] * gd[-1, 1:-1]
    rhs[:, 0] += co.b[:, 0] * gd[1:-1, 0]
    rhs[:, -1] += co.t[:, -1] * gd[1:-1, -1]
    sol = np.linalg.solve(A, rhs.ravel()).reshape(mesh.interior_shape)
    out = gd.copy()
    out[1:-1, 1:-1] = sol
    return out


def _default_linear_sources(problem: ProblemSpec, mesh: Mesh) -> tuple[float, float]:
    """Source defaults: dominate -f on a sampled box, plus 10 percent margin.

    The box spans [0, 2*max(data, 1)] per component; coarse but deterministic.
    """
    psi = psi_pair(problem, mesh)
    gtr = _g_trajectory(problem, mesh)
    cap = 2.0 * max(1.0, float(psi.max()), float(gtr.max()))
    grid = np.linspace(0.0, cap, 5)
    out = []
    for a in (0, 1):
        low = 0.0
        for m in range(1, mesh.Nt + 1):
            t = float(mesh.t[m])
            for u_own in grid:
                for u_other in grid:
                    own = np.full(mesh.field_shape, u_own)
                    other = np.full(mesh.field_shape, u_other)
                    low = min(
                        low,
                        float(problem.reaction(a, mesh.X, mesh.Y, t, own, other).min()),
                    )
        out.append(1.1 * max(0.0, -low))
    return tuple(out)


def upper_linear(
    problem: ProblemSpec, mesh: Mesh, M: tuple[float, float] | None = None
) -> np.ndarray:
    """Upper trajectory from the reaction-free scheme with constant sources M."""
    if M is None:
        M = _default_linear_sources(problem, mesh)
    if min(M) < 0:
        raise ConstructionError("linear upper sources must be nonnegative")
    out = np.empty((mesh.Nt + 1, 2) + mesh.field_shape)
    out[0] = psi_pair(problem, mesh)
    for m in range(1, mesh.Nt + 1):
        for a in (0, 1):
            out[m, a] = _solve_linear_level(problem, mesh, a, m, out[m - 1, a], M[a])
    return out


def upper_constant(problem: ProblemSpec, mesh: Mesh, K: tuple[float, float]) -> np.ndarray:
    """Upper trajectory: psi at the initial level, the constant K afterwards."""
    psi = psi_pair(problem, mesh)
    gtr = _g_trajectory(problem, mesh)
    bmask = mesh.boundary_mask()
    noninc = problem.kind is QuasiMonotoneClass.NONINCREASING
    for a in (0, 1):
        worst = float(psi[a].max()) - K[a]
        if worst > _TOL:
            raise ConstructionError(
                f"K_{a + 1} = {K[a]:g} below initial data by {worst:.3e}"
            )
        worst = float(gtr[:, a][:, bmask].max()) - K[a]
        if worst > _TOL:
            raise ConstructionError(
                f"K_{a + 1} = {K[a]:g} below boundary data by {worst:.3e}"
            )
    for m in range(1, mesh.Nt + 1):
        t = float(mesh.t[m])
        for a in (0, 1):
            own = np.full(mesh.field_shape, float(K[a]))
            partner = 0.0 if noninc else float(K[1 - a])
            other = np.full(mesh.field_shape, partner)
            worst = float(-problem.reaction(a, mesh.X, mesh.Y, t, own, other).min())
            if worst > _TOL:
                raise ConstructionError(
                    f"f_{a + 1} at K dips below zero by {worst:.3e} at t={t:g}; "
                    "constant upper solution refused"
                )
    out = np.empty((mesh.Nt + 1, 2) + mesh.field_shape)
    out[0] = psi
    for m in range(1, mesh.Nt + 1):
        for a in (0, 1):
            out[m, a] = K[a]
    return out


def auxiliary_upper(
    problem: ProblemSpec, mesh: Mesh, M0: float, K2: float
) -> np.ndarray:
    """Component 1 from the linear recipe with source M0; component 2 constant K2."""
    psi = psi_pair(problem, mesh)
    if float(psi[1].max()) - K2 > _TOL:
        raise ConstructionError("component-2 cap below initial data")
    out = np.empty((mesh.Nt + 1, 2) + mesh.field_shape)
    out[0] = psi
    for m in range(1, mesh.Nt + 1):
        out[m, 0] = _solve_linear_level(problem, mesh, 0, m, out[m - 1, 0], M0)
        out[m, 1] = K2
    return out


def build_trajectory(problem: ProblemSpec, mesh: Mesh, rule: ConstructionRule, role: str,
                     other_max: tuple[float, float] | None = None) -> np.ndarray:
    if role == "lower":
        if rule.kind != "zero_lower":
            raise ConstructionError(f"unsupported lower construction {rule.kind!r}")
        return _lower_zero_trajectory(problem, mesh, other_max)
    if rule.kind == "linear_upper":
        return upper_linear(problem, mesh, rule.M)
    if rule.kind == "constant_upper":
        return upper_constant(problem, mesh, rule.K)
    if rule.kind == "auxiliary_linear_upper":
        return auxiliary_upper(problem, mesh, rule.M0, rule.K[1])
    raise ConstructionError(f"unsupported upper construction {rule.kind!r}")


def build_bracket(
    problem: ProblemSpec,
    mesh: Mesh,
    lower_rule: ConstructionRule,
    upper_rule: ConstructionRule,
    verify: bool = True,
) -> Bracket:
    """Build both trajectories and (by default) verify them at every level."""
    from .monotone import ordered_pair_violations

    upper = build_trajectory(problem, mesh, upper_rule, "upper")
    other_max = (float(upper[:, 0].max()), float(upper[:, 1].max()))
    lower = build_trajectory(problem, mesh, lower_rule, "lower", other_max=other_max)
    if verify:
        for m in range(1, mesh.Nt + 1):
            bad = ordered_pair_violations(
                problem, mesh, upper[m], lower[m], m, prev=upper[m - 1], prev_lower=lower[m - 1]
            )
            if bad:
                raise ConstructionError(
                    f"constructed bracket invalid at level {m}: " + "; ".join(bad)
                )
    return Bracket(upper=upper, lower=lower)
