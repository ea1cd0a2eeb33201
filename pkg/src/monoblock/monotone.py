"""Block monotone Jacobi and Gauss-Seidel time stepping.

Each time level solves the nonlinear scheme through monotone sequences
started at constructed upper and lower solutions. One iteration solves, per
component and per vertical line i, the shifted tridiagonal system

    (A_i + c I) Z_i = eta * L_i Z_(i-1) - G_i(U_prev_iterate)

where G is the scheme residual of the previous iterate, c bounds the own
derivative of the reaction from above over the working sector, and eta
selects block Jacobi (0, all lines from old data) or block Gauss-Seidel
(1, sweeping i upward with the already-updated left neighbor). The M-matrix
structure plus the quasi-monotone reaction makes upper sequences decrease,
lower sequences increase, and both stay ordered at every iteration.

A sequence is always a full two-component pair that marches its own
previous-level trajectory. For nondecreasing reactions sequence A is the
upper pair and sequence B the lower pair. For nonincreasing reactions the
pairs mix components: A = (upper_1, lower_2) and B = (lower_1, upper_2),
and each member's residual is evaluated against its partner in the same
pair. The level is accepted once all four member residual norms drop to the
stopping accuracy delta.
"""

from __future__ import annotations

import os
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .blocksolve import LineFactor, TriDiag, TriFactor, factor_tridiag, solve_factored
from .discretization import residual_field, stencil_coeffs, stencil_violations
from .mesh import Mesh
from .reaction import ProblemSpec, QuasiMonotoneClass, c_level, g_pair, psi_pair

ORDER_SLACK = 1e-10
SIGN_SLACK = 1e-10

MEMBER_KEYS = ("upper_1", "upper_2", "lower_1", "lower_2")


class MonotoneIterationError(RuntimeError):
    """Raised when a level fails to reach the stopping accuracy within max_iters."""


@dataclass(frozen=True)
class SweepVariant:
    eta: int

    def __post_init__(self):
        if self.eta not in (0, 1):
            raise ValueError("eta must be 0 (Jacobi) or 1 (Gauss-Seidel)")

    @property
    def name(self) -> str:
        return "jacobi" if self.eta == 0 else "gauss-seidel"

    @staticmethod
    def jacobi() -> "SweepVariant":
        return SweepVariant(eta=0)

    @staticmethod
    def gauss_seidel() -> "SweepVariant":
        return SweepVariant(eta=1)

    @staticmethod
    def from_name(name: str) -> "SweepVariant":
        key = name.strip().lower().replace("_", "-")
        if key == "jacobi":
            return SweepVariant.jacobi()
        if key in ("gauss-seidel", "gs"):
            return SweepVariant.gauss_seidel()
        raise ValueError(f"unknown method {name!r}")


@dataclass
class TimeStepPolicy:
    delta: float = 1e-8
    max_iters: int = 10000
    tau_check: str = "warn"  # enforce | warn | off
    record_iterates: bool = False
    # Experimental: seed level m >= 2 from the accepted iterates of m - 1
    # instead of the construction rule. Outside the monotone theory; never
    # used by the theorem-verification tests.
    warm_start: bool = False

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.tau_check not in ("enforce", "warn", "off"):
            raise ValueError("tau_check must be enforce, warn, or off")


@dataclass(frozen=True)
class TauCheck:
    ok: bool
    beta_max: float
    tau: float


def check_tau_restriction(problem: ProblemSpec, mesh: Mesh) -> TauCheck:
    """Step-size restriction from the sector bounds.

    beta_m = max(0, q_m - c_lower_m) with q_m the largest cross bound and
    c_lower_m the smallest own lower bound over components and mesh points at
    level m. The check passes when every beta_m is zero (no restriction) or
    tau * max_m beta_m < 1.
    """
    beta_max = 0.0
    for m in range(1, mesh.Nt + 1):
        t = float(mesh.t[m])
        q_m = max(float(np.max(problem.q_bound[a](mesh.X, mesh.Y, t))) for a in (0, 1))
        cl_m = min(float(np.min(problem.c_lower[a](mesh.X, mesh.Y, t))) for a in (0, 1))
        beta_max = max(beta_max, max(0.0, q_m - cl_m))
    ok = beta_max == 0.0 or mesh.tau * beta_max < 1.0
    return TauCheck(ok=ok, beta_max=beta_max, tau=mesh.tau)


@dataclass
class LevelEntry:
    m: int
    t: float
    n_iters: int
    residuals: dict[str, float]
    violations: list[str] = field(default_factory=list)
    structural: list[str] = field(default_factory=list)
    wall_time: float = 0.0


@dataclass
class SolveReport:
    method: str
    delta: float
    levels: list[LevelEntry] = field(default_factory=list)
    tau: TauCheck | None = None

    @property
    def n_per_level(self) -> list[int]:
        return [e.n_iters for e in self.levels]

    @property
    def violation_count(self) -> int:
        return sum(len(e.violations) for e in self.levels)

    @property
    def structural_count(self) -> int:
        return sum(len(e.structural) for e in self.levels)

    def to_dict(self, include_timing: bool = True) -> dict:
        levels = []
        for e in self.levels:
            row = {
                "m": e.m,
                "t": e.t,
                "n_iters": e.n_iters,
                "residuals": {k: float(v) for k, v in e.residuals.items()},
                "violations": list(e.violations),
                "structural": list(e.structural),
            }
            if include_timing:
                row["wall_time"] = e.wall_time
            levels.append(row)
        out = {"method": self.method, "delta": self.delta, "levels": levels}
        if self.tau is not None:
            out["tau_check"] = {
                "ok": self.tau.ok,
                "beta_max": self.tau.beta_max,
                "tau": self.tau.tau,
            }
        return out


@dataclass
class IterationState:
    """Optional per-level trace: iterates and residual norms per iteration."""

    pairs_a: list[np.ndarray] = field(default_factory=list)
    pairs_b: list[np.ndarray] = field(default_factory=list)
    norms: list[dict[str, float]] = field(default_factory=list)


def _member_is_upper(kind: QuasiMonotoneClass, seq: int, alpha: int) -> bool:
    if kind is QuasiMonotoneClass.NONDECREASING:
        return seq == 0
    return (seq == 0) == (alpha == 0)


def _member_key(kind: QuasiMonotoneClass, seq: int, alpha: int) -> str:
    role = "upper" if _member_is_upper(kind, seq, alpha) else "lower"
    return f"{role}_{alpha + 1}"


def _worker_count() -> int:
    raw = os.environ.get("MONOBLOCK_THREADS", "").strip()
    try:
        n = int(raw) if raw else 0
    except ValueError:
        n = 0
    if n <= 0:
        # auto: the batched solve is already vectorized across lines, so a
        # single thread is the right default at desk scale
        return 1
    return n


def _solve_line_batch(fac: TriFactor, rhs: np.ndarray) -> np.ndarray:
    workers = _worker_count()
    nlines = rhs.shape[0]
    if workers <= 1 or nlines < 2 * workers:
        return solve_factored(fac, rhs)
    from concurrent.futures import ThreadPoolExecutor

    bounds = np.linspace(0, nlines, workers + 1).astype(int)
    out = np.empty_like(rhs)

    def run(k):
        lo, hi = bounds[k], bounds[k + 1]
        sub = TriFactor(low=fac.low[lo:hi], dmod=fac.dmod[lo:hi], sup=fac.sup[lo:hi])
        out[lo:hi] = solve_factored(sub, rhs[lo:hi])

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run, range(workers)))
    return out


class _Level:
    """Per-level precomputation: stencils, shifts, factors, boundary data."""

    def __init__(self, problem: ProblemSpec, mesh: Mesh, m: int, variant: SweepVariant):
        self.problem = problem
        self.mesh = mesh
        self.m = m
        self.c = c_level(problem, mesh, m)
        self.g = g_pair(problem, mesh, m)
        self.coeffs = [stencil_coeffs(problem, mesh, a, m) for a in (0, 1)]
        self.structural: list[str] = []
        self.batched: list[TriFactor] = []
        self.line_factors: list[list[LineFactor]] = []
        for a in (0, 1):
            co = self.coeffs[a]
            if 1.0 / mesh.tau + self.c[a] <= 0:
                raise ValueError(
                    f"iteration shift c_{a + 1} = {self.c[a]:.3e} destroys dominance"
                )
            self.structural += [
                f"component {a + 1}: {v}"
                for v in stencil_violations(co, mesh.tau, self.c[a])
            ]
            tri = TriDiag(sub=-co.b[:, 1:], diag=co.d + self.c[a], sup=-co.t[:, :-1])
            fac = factor_tridiag(tri)
            self.batched.append(fac)
            if variant.eta == 1:
                self.line_factors.append(
                    [
                        LineFactor(
                            TriFactor(low=fac.low[k], dmod=fac.dmod[k], sup=fac.sup[k])
                        )
                        for k in range(mesh.Nx - 1)
                    ]
                )

    def residual(self, alpha: int, U_self, U_other, prev_self) -> np.ndarray:
        return residual_field(
            self.problem,
            self.mesh,
            alpha,
            self.m,
            U_self,
            U_other,
            prev_self,
            coeffs=self.coeffs[alpha],
            g_field=self.g[alpha],
        )


def _advance_level(
    problem: ProblemSpec,
    mesh: Mesh,
    variant: SweepVariant,
    policy: TimeStepPolicy,
    starts: tuple[np.ndarray, np.ndarray],
    prevs: tuple[np.ndarray, np.ndarray],
    m: int,
) -> tuple[np.ndarray, np.ndarray, LevelEntry, IterationState | None]:
    """Run both sequences at level m until all member residuals reach delta."""
    t0 = time.perf_counter()
    lvl = _Level(problem, mesh, m, variant)
    kind = problem.kind
    U = [np.array(starts[0], dtype=float, copy=True), np.array(starts[1], dtype=float, copy=True)]
    res = [[None, None], [None, None]]
    for s in (0, 1):
        for a in (0, 1):
            res[s][a] = lvl.residual(a, U[s][a], U[s][1 - a], prevs[s][a])

    violations: list[str] = []
    trace = IterationState() if policy.record_iterates else None
    if trace is not None:
        trace.pairs_a.append(U[0].copy())
        trace.pairs_b.append(U[1].copy())

    def norms() -> dict[str, float]:
        return {
            _member_key(kind, s, a): float(np.abs(res[s][a]).max())
            for s in (0, 1)
            for a in (0, 1)
        }

    n_done = 0
    for n in range(1, policy.max_iters + 1):
        old = [U[0].copy(), U[1].copy()]
        for s in (0, 1):
            for a in (0, 1):
                rhs = -res[s][a]
                if variant.eta == 0:
                    Z = _solve_line_batch(lvl.batched[a], rhs)
                else:
                    Z = np.empty_like(rhs)
                    zprev = np.zeros(mesh.Ny - 1)
                    lcoef = lvl.coeffs[a].l
                    line_facs = lvl.line_factors[a]
                    for k in range(mesh.Nx - 1):
                        zprev = line_facs[k].solve(rhs[k] + lcoef[k] * zprev)
                        Z[k] = zprev
                U[s][a][1:-1, 1:-1] += Z
                if n == 1:
                    ga = lvl.g[a]
                    U[s][a][0, :] = ga[0, :]
                    U[s][a][-1, :] = ga[-1, :]
                    U[s][a][:, 0] = ga[:, 0]
                    U[s][a][:, -1] = ga[:, -1]
        for s in (0, 1):
            for a in (0, 1):
                res[s][a] = lvl.residual(a, U[s][a], U[s][1 - a], prevs[s][a])

        # monotonicity and residual-sign audits
        for a in (0, 1):
            s_up = 0 if _member_is_upper(kind, 0, a) else 1
            s_lo = 1 - s_up
            up_new, up_old = U[s_up][a], old[s_up][a]
            lo_new, lo_old = U[s_lo][a], old[s_lo][a]
            worst = float((up_new - up_old).max())
            if worst > ORDER_SLACK:
                violations.append(f"iter {n}: upper_{a + 1} increased by {worst:.3e}")
            worst = float((lo_old - lo_new).max())
            if worst > ORDER_SLACK:
                violations.append(f"iter {n}: lower_{a + 1} decreased by {worst:.3e}")
            worst = float((lo_new - up_new).max())
            if worst > ORDER_SLACK:
                violations.append(f"iter {n}: lower_{a + 1} above upper_{a + 1} by {worst:.3e}")
            worst = float(-res[s_up][a].min())
            if worst > SIGN_SLACK:
                violations.append(f"iter {n}: upper_{a + 1} residual below 0 by {worst:.3e}")
            worst = float(res[s_lo][a].max())
            if worst > SIGN_SLACK:
                violations.append(f"iter {n}: lower_{a + 1} residual above 0 by {worst:.3e}")

        if trace is not None:
            trace.pairs_a.append(U[0].copy())
            trace.pairs_b.append(U[1].copy())
            trace.norms.append(norms())

        n_done = n
        if max(norms().values()) <= policy.delta:
            break
    else:
        raise MonotoneIterationError(
            f"level {m}: residual {max(norms().values()):.3e} above delta "
            f"{policy.delta:.1e} after {policy.max_iters} iterations"
        )

    entry = LevelEntry(
        m=m,
        t=float(mesh.t[m]),
        n_iters=n_done,
        residuals=norms(),
        violations=violations,
        structural=lvl.structural,
        wall_time=time.perf_counter() - t0,
    )
    return U[0], U[1], entry, trace


def step_nondecreasing(
    problem: ProblemSpec,
    mesh: Mesh,
    variant: SweepVariant,
    policy: TimeStepPolicy,
    upper0: np.ndarray,
    lower0: np.ndarray,
    prev: np.ndarray,
    m: int,
) -> tuple[np.ndarray, np.ndarray, LevelEntry]:
    """One level of the nondecreasing iteration; prev feeds both sequences."""
    if problem.kind is not QuasiMonotoneClass.NONDECREASING:
        raise ValueError("problem class is not nondecreasing")
    upper, lower, entry, _ = _advance_level(
        problem, mesh, variant, policy, (upper0, lower0), (prev, prev), m
    )
    return upper, lower, entry


def step_nonincreasing(
    problem: ProblemSpec,
    mesh: Mesh,
    variant: SweepVariant,
    policy: TimeStepPolicy,
    upper0: np.ndarray,
    lower0: np.ndarray,
    prev_pairA: np.ndarray,
    prev_pairB: np.ndarray,
    m: int,
) -> tuple[np.ndarray, np.ndarray, LevelEntry]:
    """One level of the nonincreasing iteration.

    Mixes the constructed pair into the two coupled sequences
    A = (upper_1, lower_2), B = (lower_1, upper_2); each marches its own
    previous-level trajectory value.
    """
    if problem.kind is not QuasiMonotoneClass.NONINCREASING:
        raise ValueError("problem class is not nonincreasing")
    pairA0 = np.stack([upper0[0], lower0[1]])
    pairB0 = np.stack([lower0[0], upper0[1]])
    return _advance_level(
        problem, mesh, variant, policy, (pairA0, pairB0), (prev_pairA, prev_pairB), m
    )[:3]


def ordered_pair_violations(
    problem: ProblemSpec,
    mesh: Mesh,
    upper: np.ndarray,
    lower: np.ndarray,
    m: int,
    prev: np.ndarray,
    prev_lower: np.ndarray | None = None,
    slack: float = ORDER_SLACK,
) -> list[str]:
    """Check the ordered upper/lower solution conditions at level m.

    upper and lower hold the per-component upper and lower member fields.
    prev supplies the previous-level trajectory values for the upper members'
    time terms; prev_lower (default: prev) for the lower members. Checks
    ordering, boundary and previous-level inequalities, and the
    class-appropriate residual signs evaluated with boundary folding.
    """
    if prev_lower is None:
        prev_lower = prev
    out = []
    gd = g_pair(problem, mesh, m)
    worst = float((lower - upper).max())
    if worst > slack:
        out.append(f"ordering: lower above upper by {worst:.3e}")
    worst = float((prev_lower - prev).max())
    if worst > slack:
        out.append(f"previous level: lower above upper by {worst:.3e}")
    bmask = mesh.boundary_mask()
    for a in (0, 1):
        worst = float((gd[a][bmask] - upper[a][bmask]).max())
        if worst > slack:
            out.append(f"boundary: upper_{a + 1} below boundary data by {worst:.3e}")
        worst = float((lower[a][bmask] - gd[a][bmask]).max())
        if worst > slack:
            out.append(f"boundary: lower_{a + 1} above boundary data by {worst:.3e}")
    noninc = problem.kind is QuasiMonotoneClass.NONINCREASING
    for a in (0, 1):
        other_up = lower[1 - a] if noninc else upper[1 - a]
        other_lo = upper[1 - a] if noninc else lower[1 - a]
        res_up = residual_field(problem, mesh, a, m, upper[a], other_up, prev[a])
        res_lo = residual_field(problem, mesh, a, m, lower[a], other_lo, prev_lower[a])
        worst = float(-res_up.min())
        if worst > slack:
            out.append(f"residual: upper_{a + 1} below 0 by {worst:.3e}")
        worst = float(res_lo.max())
        if worst > slack:
            out.append(f"residual: lower_{a + 1} above 0 by {worst:.3e}")
    return out


def verify_ordered_pair(
    problem: ProblemSpec,
    mesh: Mesh,
    upper: np.ndarray,
    lower: np.ndarray,
    m: int,
    prev: np.ndarray,
    prev_lower: np.ndarray | None = None,
) -> bool:
    return not ordered_pair_violations(problem, mesh, upper, lower, m, prev, prev_lower)


@dataclass
class MarchResult:
    mesh: Mesh
    kind: QuasiMonotoneClass
    seq_a: np.ndarray
    seq_b: np.ndarray
    report: SolveReport
    traces: list[IterationState] | None = None

    def solution(self, m: int | None = None) -> np.ndarray:
        """Accepted solution pair (sequence A by convention)."""
        return self.seq_a[m if m is not None else -1]

    def envelope(self, m: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(lower, upper) member pairs at level m, role-mapped per class."""
        idx = m if m is not None else -1
        a, b = self.seq_a[idx], self.seq_b[idx]
        if self.kind is QuasiMonotoneClass.NONDECREASING:
            return b, a
        lower = np.stack([b[0], a[1]])
        upper = np.stack([a[0], b[1]])
        return lower, upper


def march(
    problem: ProblemSpec,
    mesh: Mesh,
    variant: SweepVariant,
    policy: TimeStepPolicy,
    init,
) -> MarchResult:
    """March the monotone iteration over all time levels.

    init is either a Bracket (explicit per-level upper/lower trajectories) or
    a (lower_rule, upper_rule) ConstructionRule pair to build one from.
    Start pairs are verified against the accepted previous-level values at
    every level; violations are recorded in the report rather than raised.
    """
    from .brackets import Bracket, build_bracket

    tau = None
    if policy.tau_check != "off":
        tau = check_tau_restriction(problem, mesh)
        if not tau.ok:
            msg = (
                f"step restriction violated: tau * beta = "
                f"{mesh.tau * tau.beta_max:.3f} >= 1"
            )
            if policy.tau_check == "enforce":
                raise ValueError(msg)
            warnings.warn(msg, stacklevel=2)

    if isinstance(init, Bracket):
        bracket = init
    else:
        lower_rule, upper_rule = init
        bracket = build_bracket(problem, mesh, lower_rule, upper_rule)

    kind = problem.kind
    noninc = kind is QuasiMonotoneClass.NONINCREASING
    shape = (mesh.Nt + 1, 2) + mesh.field_shape
    seq_a = np.empty(shape)
    seq_b = np.empty(shape)
    seq_a[0] = seq_b[0] = psi_pair(problem, mesh)
    prevs = (seq_a[0].copy(), seq_b[0].copy())
    report = SolveReport(method=variant.name, delta=policy.delta, tau=tau)
    traces: list[IterationState] | None = [] if policy.record_iterates else None

    for m in range(1, mesh.Nt + 1):
        up_m, lo_m = bracket.upper[m], bracket.lower[m]
        if noninc:
            A0 = np.stack([up_m[0], lo_m[1]])
            B0 = np.stack([lo_m[0], up_m[1]])
        else:
            A0, B0 = up_m.copy(), lo_m.copy()
        if policy.warm_start and m >= 2:
            A0, B0 = seq_a[m - 1].copy(), seq_b[m - 1].copy()

        if noninc:
            upper_members = np.stack([A0[0], B0[1]])
            lower_members = np.stack([B0[0], A0[1]])
            prev_up = np.stack([prevs[0][0], prevs[1][1]])
            prev_lo = np.stack([prevs[1][0], prevs[0][1]])
        else:
            upper_members, lower_members = A0, B0
            prev_up, prev_lo = prevs[0], prevs[1]
        start_violations = [
            f"start: {v}"
            for v in ordered_pair_violations(
                problem, mesh, upper_members, lower_members, m, prev_up, prev_lo
            )
        ]

        accA, accB, entry, trace = _advance_level(
            problem, mesh, variant, policy, (A0, B0), prevs, m
        )
        entry.violations = start_violations + entry.violations
        seq_a[m], seq_b[m] = accA, accB
        prevs = (accA, accB)
        report.levels.append(entry)
        if traces is not None:
            traces.append(trace)

    return MarchResult(
        mesh=mesh, kind=kind, seq_a=seq_a, seq_b=seq_b, report=report, traces=traces
    )
