"""Bundled application models and test problems.

Each model supplies the reaction pair, analytic derivatives, sector
derivative bounds, boundary/initial data, and a default bracket recipe.
Data fields accept plain numbers (wrapped as constants) or vectorized
callables; caps marked "auto" are resolved from the data maxima on the
given mesh at 1.05 times the minimum admissible value.

gas_liquid      Absorption of a dissolved gas into interacting liquid
                agents, written in shifted variables so the reaction pair is
                quasi-monotone nondecreasing. f1 = -s1 (r1 - u1) u2,
                f2 = s2 (r1 - u1) u2, sector [0, r1] x [0, r2].
volterra_lotka  Two cooperating populations with logistic self-limits,
                nondecreasing, zero boundary. f_a = -u_a (1 - u_a + k u_o).
belousov_zhabotinskii
                Two-variable oscillating reaction, nonincreasing.
                f1 = -u1 (a - b u1 - s1 u2), f2 = s2 u1 u2.
enzyme_substrate
                Michaelis-Menten style substrate/enzyme kinetics,
                nonincreasing. f1 = a1 u1 u2 - b1 (E0 - u2),
                f2 = a2 u1 u2 - b2 (E0 - u2); component-2 cap is the total
                enzyme E0.

manufactured_problem builds a forced problem with a known exact solution
for convergence studies; synthetic_bounds_problem pins the sector bounds
directly for step-restriction tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .brackets import ConstructionRule, auxiliary_upper_rule, constant_upper_rule, zero_lower_rule
from .mesh import Mesh
from .reaction import (
    FieldFn,
    ProblemSpec,
    QuasiMonotoneClass,
    SpaceFn,
    constant_field,
    constant_space,
)

MODEL_NAMES = (
    "gas_liquid",
    "volterra_lotka",
    "belousov_zhabotinskii",
    "enzyme_substrate",
)


def _as_field(v) -> FieldFn:
    return constant_field(v) if isinstance(v, (int, float)) else v


def _as_space(v) -> SpaceFn:
    return constant_space(v) if isinstance(v, (int, float)) else v


def _default_bump(x, y):
    return np.sin(np.pi * np.asarray(x)) * np.sin(np.pi * np.asarray(y))


def _vel_pair(vel) -> tuple:
    if vel is None:
        zero = constant_field(0.0)
        return ((zero, zero), (zero, zero))
    return tuple(tuple(_as_field(c) for c in comp) for comp in vel)


def _space_max(fn: SpaceFn, mesh: Mesh) -> float:
    return float(np.max(fn(mesh.X, mesh.Y)))


def _field_max(fn: FieldFn, mesh: Mesh) -> float:
    return max(
        float(np.max(fn(mesh.X, mesh.Y, float(t)))) for t in mesh.t
    )


def _need_mesh(mesh: Mesh | None, what: str) -> Mesh:
    if mesh is None:
        raise ValueError(f"a mesh is required to resolve {what} from the data maxima")
    return mesh


@dataclass(frozen=True)
class GasLiquidParams:
    sigma1: float = 1.0
    sigma2: float = 1.0
    rho1: float = 1.0
    rho2: float | None = None  # auto: 1.05 * max(boundary, initial) of component 2
    eps: tuple[float, float] = (1.0, 1.0)
    vel: tuple | None = None
    g1: object = 0.25
    g2: object = 0.5
    psi1: object = None
    psi2: object = None

    def data(self):
        g1, g2 = _as_field(self.g1), _as_field(self.g2)
        psi1 = _as_space(self.psi1) if self.psi1 is not None else (
            lambda x, y: 0.25 + 0.5 * _default_bump(x, y)
        )
        psi2 = _as_space(self.psi2) if self.psi2 is not None else (
            lambda x, y: 0.5 + 0.5 * _default_bump(x, y)
        )
        return g1, g2, psi1, psi2

    def resolve_rho2(self, mesh: Mesh | None) -> float:
        if self.rho2 is not None:
            return self.rho2
        g1, g2, psi1, psi2 = self.data()
        mesh = _need_mesh(mesh, "the gas-liquid sector cap rho2")
        return 1.05 * max(_field_max(g2, mesh), _space_max(psi2, mesh))


@dataclass(frozen=True)
class VolterraLotkaParams:
    a1: float = 0.5
    a2: float = 0.5
    eps: tuple[float, float] = (1.0, 1.0)
    vel: tuple | None = None
    psi1: object = None
    psi2: object = None

    def data(self):
        psi1 = _as_space(self.psi1) if self.psi1 is not None else _default_bump
        psi2 = _as_space(self.psi2) if self.psi2 is not None else _default_bump
        return psi1, psi2

    def resolve_M(self, mesh: Mesh | None) -> tuple[float, float]:
        if self.a1 * self.a2 >= 1.0:
            raise ValueError("interaction product a1*a2 must be below 1")
        psi1, psi2 = self.data()
        mesh = _need_mesh(mesh, "the Volterra-Lotka caps M")
        p1 = _space_max(psi1, mesh)
        p2 = _space_max(psi2, mesh)
        M2 = max((self.a2 + 1.0) / (1.0 - self.a1 * self.a2), p2, (p1 - 1.0) / self.a1)
        M1 = self.a1 * M2 + 1.0
        if M1 > (M2 - 1.0) / self.a2 + 1e-12:
            raise ValueError(
                f"cap window empty: M1 = {M1:g} exceeds (M2 - 1)/a2 = {(M2 - 1.0) / self.a2:g}"
            )
        return M1, M2


@dataclass(frozen=True)
class BelousovZhabotinskiiParams:
    a: float = 1.0
    b: float = 1.0
    sigma1: float = 0.5
    sigma2: float = 0.5
    K1: float | None = None  # auto: 1.05 * max(a/b, boundary, initial)
    K2: float | None = None  # auto: 1.05 * max(boundary, initial)
    eps: tuple[float, float] = (1.0, 1.0)
    vel: tuple | None = None
    g1: object = 0.0
    g2: object = 0.0
    psi1: object = None
    psi2: object = None

    def data(self):
        g1, g2 = _as_field(self.g1), _as_field(self.g2)
        psi1 = _as_space(self.psi1) if self.psi1 is not None else _default_bump
        psi2 = _as_space(self.psi2) if self.psi2 is not None else _default_bump
        return g1, g2, psi1, psi2

    def resolve_K(self, mesh: Mesh | None) -> tuple[float, float]:
        if self.K1 is not None and self.K2 is not None:
            return self.K1, self.K2
        g1, g2, psi1, psi2 = self.data()
        mesh = _need_mesh(mesh, "the reaction caps K")
        K1 = self.K1
        if K1 is None:
            K1 = 1.05 * max(self.a / self.b, _field_max(g1, mesh), _space_max(psi1, mesh))
        K2 = self.K2
        if K2 is None:
            K2 = 1.05 * max(_field_max(g2, mesh), _space_max(psi2, mesh))
        return K1, K2


@dataclass(frozen=True)
class EnzymeSubstrateParams:
    a1: float = 1.0
    a2: float = 1.0
    b1: float = 1.0
    b2: float = 1.0
    E0: float = 1.0
    M0: float | None = None  # auto: 1.05 * b1 * E0 (strict inequality required)
    eps: tuple[float, float] = (1.0, 1.0)
    vel: tuple | None = None
    g1: object = 0.0
    g2: object = None
    psi1: object = None
    psi2: object = None

    def data(self):
        g1 = _as_field(self.g1)
        g2 = _as_field(self.g2) if self.g2 is not None else constant_field(0.5 * self.E0)
        psi1 = _as_space(self.psi1) if self.psi1 is not None else _default_bump
        psi2 = _as_space(self.psi2) if self.psi2 is not None else (
            lambda x, y: 0.5 * self.E0 * (1.0 + _default_bump(x, y))
        )
        return g1, g2, psi1, psi2

    def resolve_M0(self) -> float:
        M0 = 1.05 * self.b1 * self.E0 if self.M0 is None else self.M0
        if M0 <= self.b1 * self.E0:
            raise ValueError(f"M0 = {M0:g} must exceed b1*E0 = {self.b1 * self.E0:g}")
        return M0

    def substrate_majorant(self, mesh: Mesh):
        """Upper bound for the component-1 linear construction, by level time.

        The reaction-free scheme with source M0, boundary g1, and initial
        psi1 is bounded at time t by max(max g1, max psi1 + t * M0); this is
        the level estimate of the discrete maximum principle unrolled over
        levels, and it holds on every mesh.
        """
        g1, _, psi1, _ = self.data()
        gmax = _field_max(g1, mesh)
        pmax = _space_max(psi1, mesh)
        M0 = self.resolve_M0()

        def vbar(t):
            return max(gmax, pmax + float(t) * M0)

        return vbar


PARAM_TYPES = {
    "gas_liquid": GasLiquidParams,
    "volterra_lotka": VolterraLotkaParams,
    "belousov_zhabotinskii": BelousovZhabotinskiiParams,
    "enzyme_substrate": EnzymeSubstrateParams,
}


def params_from_dict(name: str, raw: dict | None):
    cls = PARAM_TYPES.get(name)
    if cls is None:
        raise ValueError(f"unknown model {name!r}; choose one of {MODEL_NAMES}")
    raw = dict(raw or {})
    if "eps" in raw:
        raw["eps"] = tuple(raw["eps"])
    if "vel" in raw and raw["vel"] is not None:
        raw["vel"] = tuple(tuple(c) for c in raw["vel"])
    return cls(**raw)


def instantiate(name: str, params=None, mesh: Mesh | None = None) -> ProblemSpec:
    """Build the ProblemSpec for a bundled model.

    The mesh argument is only needed when an auto cap must be resolved from
    sampled data maxima (every default configuration needs it).
    """
    if isinstance(params, dict) or params is None:
        params = params_from_dict(name, params)

    if name == "gas_liquid":
        p = params
        rho2 = p.resolve_rho2(mesh)
        g1, g2, psi1, psi2 = p.data()
        s1, s2, r1 = p.sigma1, p.sigma2, p.rho1

        def f1(x, y, t, u1, u2):
            return -s1 * (r1 - u1) * u2

        def f2(x, y, t, u1, u2):
            return s2 * (r1 - u1) * u2

        return ProblemSpec(
            kind=QuasiMonotoneClass.NONDECREASING,
            eps=tuple(p.eps),
            vel=_vel_pair(p.vel),
            f=(f1, f2),
            df_own=(
                lambda x, y, t, u1, u2: s1 * u2,
                lambda x, y, t, u1, u2: s2 * (r1 - u1),
            ),
            df_cross=(
                lambda x, y, t, u1, u2: -s1 * (r1 - u1),
                lambda x, y, t, u1, u2: -s2 * u2,
            ),
            g=(g1, g2),
            psi=(psi1, psi2),
            c_bound=(constant_field(s1 * rho2), constant_field(s2 * r1)),
            c_lower=(constant_field(0.0), constant_field(0.0)),
            q_bound=(constant_field(s1 * r1), constant_field(s2 * rho2)),
            name=name,
        )

    if name == "volterra_lotka":
        p = params
        M1, M2 = p.resolve_M(mesh)
        psi1, psi2 = p.data()
        a1, a2 = p.a1, p.a2

        def f1(x, y, t, u1, u2):
            return -u1 * (1.0 - u1 + a1 * u2)

        def f2(x, y, t, u1, u2):
            return -u2 * (1.0 + a2 * u1 - u2)

        zero = constant_field(0.0)
        return ProblemSpec(
            kind=QuasiMonotoneClass.NONDECREASING,
            eps=tuple(p.eps),
            vel=_vel_pair(p.vel),
            f=(f1, f2),
            df_own=(
                lambda x, y, t, u1, u2: -1.0 + 2.0 * u1 - a1 * u2,
                lambda x, y, t, u1, u2: -1.0 - a2 * u1 + 2.0 * u2,
            ),
            df_cross=(
                lambda x, y, t, u1, u2: -a1 * u1,
                lambda x, y, t, u1, u2: -a2 * u2,
            ),
            g=(zero, zero),
            psi=(psi1, psi2),
            c_bound=(constant_field(2.0 * M1), constant_field(2.0 * M2)),
            c_lower=(
                constant_field(-(1.0 + a1 * M2)),
                constant_field(-(1.0 + a2 * M1)),
            ),
            q_bound=(constant_field(a1 * M1), constant_field(a2 * M2)),
            name=name,
        )

    if name == "belousov_zhabotinskii":
        p = params
        K1, K2 = p.resolve_K(mesh)
        g1, g2, psi1, psi2 = p.data()
        a, b, s1, s2 = p.a, p.b, p.sigma1, p.sigma2

        def f1(x, y, t, u1, u2):
            return -u1 * (a - b * u1 - s1 * u2)

        def f2(x, y, t, u1, u2):
            return s2 * u1 * u2

        return ProblemSpec(
            kind=QuasiMonotoneClass.NONINCREASING,
            eps=tuple(p.eps),
            vel=_vel_pair(p.vel),
            f=(f1, f2),
            df_own=(
                lambda x, y, t, u1, u2: -a + 2.0 * b * u1 + s1 * u2,
                lambda x, y, t, u1, u2: s2 * u1,
            ),
            df_cross=(
                lambda x, y, t, u1, u2: s1 * u1,
                lambda x, y, t, u1, u2: s2 * u2,
            ),
            g=(g1, g2),
            psi=(psi1, psi2),
            c_bound=(
                constant_field(2.0 * b * K1 + s1 * K2),
                constant_field(s2 * K1),
            ),
            c_lower=(constant_field(-a), constant_field(0.0)),
            q_bound=(constant_field(s1 * K1), constant_field(s2 * K2)),
            name=name,
        )

    if name == "enzyme_substrate":
        p = params
        g1, g2, psi1, psi2 = p.data()
        a1, a2, b1, b2, E0 = p.a1, p.a2, p.b1, p.b2, p.E0
        mesh_r = _need_mesh(mesh, "the enzyme substrate majorant")
        if _space_max(psi2, mesh_r) > E0 + 1e-12:
            raise ValueError("initial enzyme level exceeds the total E0")
        vbar = p.substrate_majorant(mesh_r)

        def f1(x, y, t, u1, u2):
            return a1 * u1 * u2 - b1 * (E0 - u2)

        def f2(x, y, t, u1, u2):
            return a2 * u1 * u2 - b2 * (E0 - u2)

        def c2(x, y, t):
            return np.full_like(np.asarray(x, dtype=float), a2 * vbar(t) + b2)

        def q1(x, y, t):
            return np.full_like(np.asarray(x, dtype=float), a1 * vbar(t) + b1)

        return ProblemSpec(
            kind=QuasiMonotoneClass.NONINCREASING,
            eps=tuple(p.eps),
            vel=_vel_pair(p.vel),
            f=(f1, f2),
            df_own=(
                lambda x, y, t, u1, u2: a1 * u2,
                lambda x, y, t, u1, u2: a2 * u1 + b2,
            ),
            df_cross=(
                lambda x, y, t, u1, u2: a1 * u1 + b1,
                lambda x, y, t, u1, u2: a2 * u2,
            ),
            g=(g1, g2),
            psi=(psi1, psi2),
            c_bound=(constant_field(a1 * E0), c2),
            c_lower=(constant_field(0.0), constant_field(b2)),
            q_bound=(q1, constant_field(a2 * E0)),
            name=name,
        )

    raise ValueError(f"unknown model {name!r}; choose one of {MODEL_NAMES}")


def default_bracket(name: str, params=None, mesh: Mesh | None = None):
    """Default (lower_rule, upper_rule) pair for a bundled model."""
    if isinstance(params, dict) or params is None:
        params = params_from_dict(name, params)
    if name == "gas_liquid":
        return zero_lower_rule(), constant_upper_rule((params.rho1, params.resolve_rho2(mesh)))
    if name == "volterra_lotka":
        return zero_lower_rule(), constant_upper_rule(params.resolve_M(mesh))
    if name == "belousov_zhabotinskii":
        return zero_lower_rule(), constant_upper_rule(params.resolve_K(mesh))
    if name == "enzyme_substrate":
        return zero_lower_rule(), auxiliary_upper_rule(params.resolve_M0(), params.E0)
    raise ValueError(f"unknown model {name!r}; choose one of {MODEL_NAMES}")


def default_sector(name: str, params=None, mesh: Mesh | None = None):
    """(lo, hi) sector corners used by certificate and bound sampling."""
    if isinstance(params, dict) or params is None:
        params = params_from_dict(name, params)
    lo = (0.0, 0.0)
    if name == "gas_liquid":
        return lo, (params.rho1, params.resolve_rho2(mesh))
    if name == "volterra_lotka":
        return lo, params.resolve_M(mesh)
    if name == "belousov_zhabotinskii":
        return lo, params.resolve_K(mesh)
    if name == "enzyme_substrate":
        T = mesh.spec.T if mesh is not None else 1.0
        return lo, (params.substrate_majorant(_need_mesh(mesh, "sector"))(T), params.E0)
    raise ValueError(f"unknown model {name!r}; choose one of {MODEL_NAMES}")


def manufactured_problem(
    vel=((1.0, -0.75), (0.8, 0.6)),
    eps=(0.5, 0.5),
    sigma=(1.0, 0.8),
    scale=(1.0, 0.7),
    affine=True,
):
    """Forced problem with the known solution u_a = scale_a e^{-t} S(x, y).

    S(x, y) = sin(pi x) sin(pi y) (+ x + 0.5 y + 0.5 when affine is set, so
    the boundary data are nonzero and time-varying while the affine part
    drops out of the diffusion term). The source is folded into the
    reaction as f_a(u) = sigma_a (u_a - u*_a) - (du*/dt + L u*)_a, which
    keeps the scheme untouched, has df_own = sigma_a, df_cross = 0, and
    admits the exact solution. Returns (problem, exact) with
    exact(x, y, t) -> stacked pair.
    """
    vel = _vel_pair(vel)
    aff = 1.0 if affine else 0.0

    def space(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.sin(np.pi * x) * np.sin(np.pi * y) + aff * (x + 0.5 * y + 0.5)

    def exact_component(a, x, y, t):
        return scale[a] * math.exp(-t) * space(x, y)

    def exact(x, y, t):
        return np.stack([exact_component(0, x, y, t), exact_component(1, x, y, t)])

    def forcing(a, x, y, t):
        # du*/dt + L u* for component a
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        e = scale[a] * math.exp(-t)
        sin_sin = np.sin(np.pi * x) * np.sin(np.pi * y)
        ustar = e * (sin_sin + aff * (x + 0.5 * y + 0.5))
        dt = -ustar
        diff = eps[a] * 2.0 * np.pi**2 * e * sin_sin
        dx = e * (np.pi * np.cos(np.pi * x) * np.sin(np.pi * y) + aff)
        dy = e * (np.pi * np.sin(np.pi * x) * np.cos(np.pi * y) + 0.5 * aff)
        return dt + diff + vel[a][0](x, y, t) * dx + vel[a][1](x, y, t) * dy

    def make_f(a):
        def f(x, y, t, u1, u2):
            u_own = u1 if a == 0 else u2
            return sigma[a] * (u_own - exact_component(a, x, y, t)) - forcing(a, x, y, t)

        return f

    zero = constant_field(0.0)
    problem = ProblemSpec(
        kind=QuasiMonotoneClass.NONDECREASING,
        eps=tuple(eps),
        vel=vel,
        f=(make_f(0), make_f(1)),
        df_own=(
            lambda x, y, t, u1, u2: np.full_like(np.asarray(u1, dtype=float), sigma[0]),
            lambda x, y, t, u1, u2: np.full_like(np.asarray(u2, dtype=float), sigma[1]),
        ),
        df_cross=(
            lambda x, y, t, u1, u2: np.zeros_like(np.asarray(u1, dtype=float)),
            lambda x, y, t, u1, u2: np.zeros_like(np.asarray(u2, dtype=float)),
        ),
        g=(
            lambda x, y, t: exact_component(0, x, y, t),
            lambda x, y, t: exact_component(1, x, y, t),
        ),
        psi=(
            lambda x, y: exact_component(0, x, y, 0.0),
            lambda x, y: exact_component(1, x, y, 0.0),
        ),
        c_bound=(constant_field(sigma[0]), constant_field(sigma[1])),
        c_lower=(constant_field(sigma[0]), constant_field(sigma[1])),
        q_bound=(zero, zero),
        name="manufactured",
    )
    return problem, exact


def exact_trajectory(mesh: Mesh, exact) -> np.ndarray:
    """Sample an exact(x, y, t) pair on every level, shape (Nt+1, 2, ...)."""
    return np.stack([exact(mesh.X, mesh.Y, float(t)) for t in mesh.t])


def manufactured_bracket(problem: ProblemSpec, mesh: Mesh, exact):
    """Bracket u* +/- C around a manufactured exact solution.

    C is sized so the shifted trajectories stay upper/lower solutions
    against the accepted previous level, not just against the exact one:
    the start residual picks up sigma*C from the reaction, minus the
    consistency defect (at most maxE) and the carried step error scaled by
    1/tau (steady bound maxE / (sigma tau)). Doubling that sum keeps the
    sign with room to spare; the 0.01 floor covers the all-zero case.
    """
    from .brackets import Bracket
    from .discretization import residual_field

    ex = exact_trajectory(mesh, exact)
    s_min = min(
        float(problem.df_own[a](0.0, 0.0, 0.0, 0.0, 0.0)) for a in (0, 1)
    )
    if s_min <= 0.0:
        raise ValueError("manufactured bracket needs a positive own-derivative")
    maxE = 0.0
    for m in range(1, mesh.Nt + 1):
        for a in (0, 1):
            res = residual_field(problem, mesh, a, m, ex[m, a], ex[m, 1 - a], ex[m - 1, a])
            maxE = max(maxE, float(np.abs(res).max()))
    C = max(0.01, 2.0 * maxE * (1.0 + 1.0 / (mesh.tau * s_min)) / s_min)
    upper = ex + C
    lower = ex - C
    upper[0] = ex[0]
    lower[0] = ex[0]
    return Bracket(upper=upper, lower=lower)


def synthetic_bounds_problem(c_low: float, q: float) -> ProblemSpec:
    """Linear coupling with pinned sector bounds, for step-restriction tests.

    f_a = c_low * u_a - q * u_other gives df_own = c_low, df_cross = -q
    (nondecreasing for q >= 0), so beta = max(0, q - c_low) exactly.
    """
    zero = constant_field(0.0)
    return ProblemSpec(
        kind=QuasiMonotoneClass.NONDECREASING,
        eps=(1.0, 1.0),
        vel=_vel_pair(None),
        f=(
            lambda x, y, t, u1, u2: c_low * u1 - q * u2,
            lambda x, y, t, u1, u2: c_low * u2 - q * u1,
        ),
        df_own=(
            lambda x, y, t, u1, u2: np.full_like(np.asarray(u1, dtype=float), c_low),
            lambda x, y, t, u1, u2: np.full_like(np.asarray(u2, dtype=float), c_low),
        ),
        df_cross=(
            lambda x, y, t, u1, u2: np.full_like(np.asarray(u1, dtype=float), -q),
            lambda x, y, t, u1, u2: np.full_like(np.asarray(u2, dtype=float), -q),
        ),
        g=(zero, zero),
        psi=(constant_space(0.0), constant_space(0.0)),
        c_bound=(constant_field(c_low), constant_field(c_low)),
        c_lower=(constant_field(c_low), constant_field(c_low)),
        q_bound=(constant_field(q), constant_field(q)),
        name="synthetic-bounds",
    )
