"""Problem definitions: reaction terms, sector bounds, and monotone structure.

A problem couples two components through reaction functions f_alpha(x, y, t,
u1, u2) that are quasi-monotone on a working sector: nondecreasing systems
have d f_alpha / d u_other <= 0, nonincreasing systems have >= 0. The sector
derivative bounds (c_bound above, c_lower below, q_bound for the cross term)
are part of the model definition; every iteration shift and step-size check
reads them, so they are required rather than inferred.

All callables are vectorized over numpy arrays and must be re-entrant.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .mesh import Mesh

FieldFn = Callable[[np.ndarray, np.ndarray, float], np.ndarray]
SpaceFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
ReactionFn = Callable[[np.ndarray, np.ndarray, float, np.ndarray, np.ndarray], np.ndarray]


class QuasiMonotoneClass(enum.Enum):
    NONDECREASING = "nondecreasing"
    NONINCREASING = "nonincreasing"


def constant_field(value: float) -> FieldFn:
    v = float(value)

    def fn(x, y, t):
        return np.full_like(np.asarray(x, dtype=float), v)

    return fn


def constant_space(value: float) -> SpaceFn:
    v = float(value)

    def fn(x, y):
        return np.full_like(np.asarray(x, dtype=float), v)

    return fn


@dataclass(frozen=True)
class ProblemSpec:
    """Two-component problem on a rectangle.

    Index 0 is component 1 throughout. vel[alpha] holds the (x, y) velocity
    field pair of that component; eps[alpha] its diffusion coefficient.
    """

    kind: QuasiMonotoneClass
    eps: tuple[float, float]
    vel: tuple[tuple[FieldFn, FieldFn], tuple[FieldFn, FieldFn]]
    f: tuple[ReactionFn, ReactionFn]
    df_own: tuple[ReactionFn, ReactionFn]
    df_cross: tuple[ReactionFn, ReactionFn]
    g: tuple[FieldFn, FieldFn]
    psi: tuple[SpaceFn, SpaceFn]
    c_bound: tuple[FieldFn, FieldFn]
    c_lower: tuple[FieldFn, FieldFn]
    q_bound: tuple[FieldFn, FieldFn]
    name: str = ""

    def reaction(self, alpha: int, x, y, t, u_self, u_other):
        """f_alpha with (self, other) argument order resolved to (u1, u2)."""
        if alpha == 0:
            return self.f[0](x, y, t, u_self, u_other)
        return self.f[1](x, y, t, u_other, u_self)


def psi_pair(problem: ProblemSpec, mesh: Mesh) -> np.ndarray:
    out = np.empty((2,) + mesh.field_shape)
    for a in (0, 1):
        out[a] = np.broadcast_to(problem.psi[a](mesh.X, mesh.Y), mesh.field_shape)
    return out


def g_pair(problem: ProblemSpec, mesh: Mesh, m: int) -> np.ndarray:
    """Boundary data evaluated on the full grid at level m (interior unused)."""
    t = float(mesh.t[m])
    out = np.empty((2,) + mesh.field_shape)
    for a in (0, 1):
        out[a] = np.broadcast_to(problem.g[a](mesh.X, mesh.Y, t), mesh.field_shape)
    return out


def c_level(problem: ProblemSpec, mesh: Mesh, m: int) -> tuple[float, float]:
    """Iteration shifts: max of the own-derivative upper bound over the closed mesh."""
    t = float(mesh.t[m])
    return (
        float(np.max(problem.c_bound[0](mesh.X, mesh.Y, t))),
        float(np.max(problem.c_bound[1](mesh.X, mesh.Y, t))),
    )


def gamma(problem: ProblemSpec, c_pair: tuple[float, float], x, y, t, u1, u2):
    """Gamma_alpha(U) = c_alpha u_alpha - f_alpha(U), monotone on the sector."""
    g1 = c_pair[0] * u1 - problem.f[0](x, y, t, u1, u2)
    g2 = c_pair[1] * u2 - problem.f[1](x, y, t, u1, u2)
    return g1, g2


def lambda_shift(problem: ProblemSpec, lam: float) -> ProblemSpec:
    """Exponential substitution u = e^{lam t} z.

    Shifts every own derivative by +lam while leaving cross derivatives (as
    functions of the substituted state) unchanged, at the price of rescaled
    reaction, boundary data, and derivative bounds. Used to restore a
    positive lower bound on d f / d u_own when a model lacks one.
    """
    if lam < 0:
        raise ValueError("shift must be nonnegative")
    if lam == 0:
        return problem

    def shift_f(fa, own):
        def fn(x, y, t, z1, z2):
            s = np.exp(lam * t)
            z_own = z1 if own == 0 else z2
            return lam * z_own + np.exp(-lam * t) * fa(x, y, t, s * z1, s * z2)

        return fn

    def shift_df_own(dfa):
        def fn(x, y, t, z1, z2):
            s = np.exp(lam * t)
            return lam + dfa(x, y, t, s * z1, s * z2)

        return fn

    def shift_df_cross(dfa):
        def fn(x, y, t, z1, z2):
            s = np.exp(lam * t)
            return dfa(x, y, t, s * z1, s * z2)

        return fn

    def shift_g(ga):
        def fn(x, y, t):
            return np.exp(-lam * t) * ga(x, y, t)

        return fn

    def shift_bound(ba):
        def fn(x, y, t):
            return lam + ba(x, y, t)

        return fn

    return replace(
        problem,
        f=(shift_f(problem.f[0], 0), shift_f(problem.f[1], 1)),
        df_own=(shift_df_own(problem.df_own[0]), shift_df_own(problem.df_own[1])),
        df_cross=(shift_df_cross(problem.df_cross[0]), shift_df_cross(problem.df_cross[1])),
        g=(shift_g(problem.g[0]), shift_g(problem.g[1])),
        c_bound=(shift_bound(problem.c_bound[0]), shift_bound(problem.c_bound[1])),
        c_lower=(shift_bound(problem.c_lower[0]), shift_bound(problem.c_lower[1])),
        name=f"{problem.name}+shift{lam:g}" if problem.name else f"shift{lam:g}",
    )


def check_class_certificate(
    problem: ProblemSpec,
    lo: np.ndarray,
    hi: np.ndarray,
    t_values,
    rng: np.random.Generator,
    samples: int = 200,
    tol: float = 1e-12,
) -> list[str]:
    """Sample the cross-derivative sign condition over the sector [lo, hi].

    Returns a list of violation descriptions (empty when the declared class
    certificate holds at every sampled point).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    violations = []
    t_values = np.asarray(t_values, dtype=float)
    for _ in range(samples):
        x = rng.random()
        y = rng.random()
        t = float(rng.choice(t_values))
        u1 = lo[0] + rng.random() * (hi[0] - lo[0])
        u2 = lo[1] + rng.random() * (hi[1] - lo[1])
        for a in (0, 1):
            d = float(problem.df_cross[a](np.float64(x), np.float64(y), t, np.float64(u1), np.float64(u2)))
            if problem.kind is QuasiMonotoneClass.NONDECREASING and d > tol:
                violations.append(f"df_cross[{a}] = {d:.3e} > 0 at u=({u1:.3f},{u2:.3f}), t={t:.3f}")
            elif problem.kind is QuasiMonotoneClass.NONINCREASING and d < -tol:
                violations.append(f"df_cross[{a}] = {d:.3e} < 0 at u=({u1:.3f},{u2:.3f}), t={t:.3f}")
    return violations
