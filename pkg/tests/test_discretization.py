import numpy as np
import pytest

from monoblock.blocksolve import dominance_margin
from monoblock.discretization import (
    assemble_line,
    fold_boundary,
    residual_field,
    residual_line,
    residual_norm,
    stencil_coeffs,
    stencil_violations,
)
from monoblock.mesh import MeshSpec, build_mesh
from monoblock.models import exact_trajectory, instantiate, manufactured_problem
from monoblock.reaction import (
    ProblemSpec,
    QuasiMonotoneClass,
    constant_field,
    constant_space,
    g_pair,
)


def diffusion_only_problem(v1=0.0, v2=0.0, eps=1.0):
    zero = constant_field(0.0)
    zf = lambda x, y, t, u1, u2: np.zeros_like(np.asarray(u1, dtype=float))
    return ProblemSpec(
        kind=QuasiMonotoneClass.NONDECREASING,
        eps=(eps, eps),
        vel=(
            (constant_field(v1), constant_field(v2)),
            (constant_field(v1), constant_field(v2)),
        ),
        f=(zf, zf),
        df_own=(zf, zf),
        df_cross=(zf, zf),
        g=(zero, zero),
        psi=(constant_space(0.0), constant_space(0.0)),
        c_bound=(zero, zero),
        c_lower=(zero, zero),
        q_bound=(zero, zero),
    )


def test_stencil_no_velocity():
    mesh = build_mesh(MeshSpec(1.0, 1.0, 0.25, 2, 2, 1))
    assert mesh.hx == 0.5 and mesh.tau == 0.25
    co = stencil_coeffs(diffusion_only_problem(), mesh, 0, 1)
    assert np.all(co.l == 4.0)
    assert np.all(co.r == 4.0)
    assert np.all(co.b == 4.0)
    assert np.all(co.t == 4.0)
    assert np.all(co.d == 20.0)


def test_stencil_positive_velocity_backward():
    mesh = build_mesh(MeshSpec(1.0, 1.0, 0.25, 2, 2, 1))
    co = stencil_coeffs(diffusion_only_problem(v1=2.0), mesh, 0, 1)
    assert np.all(co.l == 8.0)
    assert np.all(co.r == 4.0)
    assert np.all(co.d == 4.0 + 8.0 + 4.0 + 4.0 + 4.0)


def test_stencil_negative_velocity_forward():
    mesh = build_mesh(MeshSpec(1.0, 1.0, 0.25, 2, 2, 1))
    co = stencil_coeffs(diffusion_only_problem(v1=-2.0), mesh, 0, 1)
    assert np.all(co.r == 8.0)
    assert np.all(co.l == 4.0)
    # off-diagonals stay nonnegative for either velocity sign
    for v in (-7.0, -2.0, 0.0, 2.0, 7.0):
        c = stencil_coeffs(diffusion_only_problem(v1=v, v2=-v), mesh, 0, 1)
        assert min(c.l.min(), c.r.min(), c.b.min(), c.t.min()) >= 0.0
        assert stencil_violations(c, mesh.tau) == []


def test_forward_difference_first_order():
    # applying the assembled operator to a smooth function reproduces
    # -eps (uxx + uyy) + v . grad u to first order in h
    def u(x, y):
        return np.sin(1.3 * x + 0.4) * np.cos(0.7 * y - 0.2)

    def lap(x, y):
        return (1.3**2 + 0.7**2) * u(x, y)

    def ux(x, y):
        return 1.3 * np.cos(1.3 * x + 0.4) * np.cos(0.7 * y - 0.2)

    def uy(x, y):
        return -0.7 * np.sin(1.3 * x + 0.4) * np.sin(0.7 * y - 0.2)

    v1, v2, eps = -2.0, 1.5, 1.0
    errs = []
    for n in (8, 16, 32):
        mesh = build_mesh(MeshSpec(1.0, 1.0, 1.0, n, n, 1))
        co = stencil_coeffs(diffusion_only_problem(v1=v1, v2=v2, eps=eps), mesh, 0, 1)
        U = u(mesh.X, mesh.Y)
        # spatial part only: subtract the time-term contribution d - sum = 1/tau
        app = (co.d - 1.0 / mesh.tau) * U[1:-1, 1:-1]
        app -= co.l * U[:-2, 1:-1]
        app -= co.r * U[2:, 1:-1]
        app -= co.b * U[1:-1, :-2]
        app -= co.t * U[1:-1, 2:]
        exact = eps * lap(mesh.Xi, mesh.Yi) + v1 * ux(mesh.Xi, mesh.Yi) + v2 * uy(mesh.Xi, mesh.Yi)
        errs.append(float(np.abs(app - exact).max()))
    assert errs[0] / errs[1] > 1.5
    assert errs[1] / errs[2] > 1.5


def test_flip_hook_breaks_m_matrix():
    # the wrong-sided difference goes negative once |v| h exceeds eps
    mesh = build_mesh(MeshSpec(1.0, 1.0, 0.25, 2, 2, 1))
    p = diffusion_only_problem(v1=6.0, eps=1.0)
    good = stencil_coeffs(p, mesh, 0, 1)
    assert stencil_violations(good, mesh.tau) == []
    bad = stencil_coeffs(p, mesh, 0, 1, _flip_upwind=True)
    assert bad.r.min() < 0
    assert any("negative off-diagonal" in v for v in stencil_violations(bad, mesh.tau))


def test_assemble_line_bounds_checked():
    mesh = build_mesh(MeshSpec(1.0, 1.0, 1.0, 4, 4, 2))
    p = diffusion_only_problem()
    with pytest.raises(ValueError):
        assemble_line(p, mesh, 0, 0, 1)
    with pytest.raises(ValueError):
        assemble_line(p, mesh, 0, 4, 1)
    with pytest.raises(ValueError):
        assemble_line(p, mesh, 0, 1, 0)


def test_line_matrix_margin_is_inverse_tau():
    mesh = build_mesh(MeshSpec(1.0, 1.0, 0.5, 5, 5, 4))
    p = instantiate("gas_liquid", params={"vel": [[1.0, -0.5], [0.25, 0.75]]}, mesh=mesh)
    for m in range(1, mesh.Nt + 1):
        co = stencil_coeffs(p, mesh, 0, m)
        assert stencil_violations(co, mesh.tau) == []
        # full five-point row margin is exactly 1/tau at every interior point
        full = co.d - (co.l + co.r + co.b + co.t)
        assert np.abs(full - 1.0 / mesh.tau).max() <= 1e-9
        for i in range(1, mesh.Nx):
            sys = assemble_line(p, mesh, 0, i, m)
            # the tridiagonal block keeps at least that margin once the
            # L, R couplings are charged against it (first/last rows keep
            # more: their missing neighbor lives in G*)
            block_margin = dominance_margin(sys.A) - sys.L - sys.R
            assert block_margin.min() >= 1.0 / mesh.tau - 1e-9


def test_gstar_folds_boundary_terms():
    mesh = build_mesh(MeshSpec(1.0, 1.0, 1.0, 3, 3, 1))
    p = instantiate("gas_liquid", mesh=mesh)
    gd = g_pair(p, mesh, 1)[0]
    co = stencil_coeffs(p, mesh, 0, 1)
    # first line folds the left boundary in addition to bottom/top rows
    sys = assemble_line(p, mesh, 0, 1, 1)
    expect = np.zeros(mesh.Ny - 1)
    expect[0] -= co.b[0, 0] * gd[1, 0]
    expect[-1] -= co.t[0, -1] * gd[1, -1]
    expect -= co.l[0] * gd[0, 1:-1]
    assert np.allclose(sys.gstar, expect)
    # interior line: only bottom/top rows contribute
    mesh4 = build_mesh(MeshSpec(1.0, 1.0, 1.0, 4, 4, 1))
    p4 = instantiate("gas_liquid", mesh=mesh4)
    gd4 = g_pair(p4, mesh4, 1)[0]
    co4 = stencil_coeffs(p4, mesh4, 0, 1)
    sys4 = assemble_line(p4, mesh4, 0, 2, 1)
    expect4 = np.zeros(mesh4.Ny - 1)
    expect4[0] -= co4.b[1, 0] * gd4[2, 0]
    expect4[-1] -= co4.t[1, -1] * gd4[2, -1]
    assert np.allclose(sys4.gstar, expect4)


def test_residual_zero_data():
    mesh = build_mesh(MeshSpec(1.0, 1.0, 1.0, 4, 4, 2))
    p = diffusion_only_problem(v1=1.0, v2=-0.5)
    z = np.zeros(mesh.field_shape)
    for i in range(1, mesh.Nx):
        left = None if i == 1 else np.zeros(mesh.Ny - 1)
        right = None if i == mesh.Nx - 1 else np.zeros(mesh.Ny - 1)
        r = residual_line(p, mesh, 0, i, 1, (left, z[i, 1:-1], right), z[i, 1:-1], z[i, 1:-1])
        assert np.all(r == 0.0)
    U = np.stack([z, z])
    assert residual_norm(p, mesh, U, U, 1) == 0.0


def test_residual_field_matches_lines():
    mesh = build_mesh(MeshSpec(1.0, 1.0, 0.5, 5, 4, 2))
    p = instantiate("gas_liquid", params={"vel": [[0.7, -0.4], [-0.2, 0.9]]}, mesh=mesh)
    rng = np.random.default_rng(31)
    U = rng.random((2,) + mesh.field_shape)
    Uprev = rng.random((2,) + mesh.field_shape)
    gd = g_pair(p, mesh, 1)
    for a in (0, 1):
        Ufold = fold_boundary(U[a], gd[a])
        field = residual_field(p, mesh, a, 1, U[a], U[1 - a], Uprev[a])
        for i in range(1, mesh.Nx):
            left = None if i == 1 else Ufold[i - 1, 1:-1]
            right = None if i == mesh.Nx - 1 else Ufold[i + 1, 1:-1]
            line = residual_line(
                p, mesh, a, i, 1,
                (left, Ufold[i, 1:-1], right),
                Uprev[a][i, 1:-1],
                U[1 - a][i, 1:-1],
            )
            assert np.abs(field[i - 1] - line).max() <= 1e-12


def test_residual_at_oracle_solution():
    from monoblock.oracle import newton_march

    mesh = build_mesh(MeshSpec(1.0, 1.0, 0.5, 5, 5, 2))
    p = instantiate("gas_liquid", mesh=mesh)
    traj = newton_march(p, mesh)
    for m in (1, 2):
        assert residual_norm(p, mesh, traj[m], traj[m - 1], m) <= 1e-10


def test_residual_after_monotone_solve():
    from monoblock.models import default_bracket
    from monoblock.monotone import SweepVariant, TimeStepPolicy, march

    mesh = build_mesh(MeshSpec(1.0, 1.0, 0.5, 9, 9, 3))
    p = instantiate("gas_liquid", mesh=mesh)
    init = default_bracket("gas_liquid", mesh=mesh)
    result = march(p, mesh, SweepVariant.jacobi(), TimeStepPolicy(delta=1e-8), init)
    for m in range(1, mesh.Nt + 1):
        assert residual_norm(p, mesh, result.solution(m), result.solution(m - 1), m) <= 1e-8


def test_upper_trajectory_residual_nonnegative():
    # short horizon keeps the linear trajectory inside the sampled source box
    from monoblock.brackets import upper_linear

    mesh = build_mesh(MeshSpec(1.0, 1.0, 0.25, 5, 5, 4))
    p = instantiate("gas_liquid", mesh=mesh)
    traj = upper_linear(p, mesh)
    for m in range(1, mesh.Nt + 1):
        for a in (0, 1):
            res = residual_field(p, mesh, a, m, traj[m, a], traj[m, 1 - a], traj[m - 1, a])
            assert res.min() >= -1e-10


def manufactured_defect(regime, n):
    if regime == "upwind":
        vel = ((1.0, -0.75), (0.8, 0.6))
        T, nt = 0.5, n
    else:
        vel = ((0.0, 0.0), (0.0, 0.0))
        T, nt = 0.25, n * n // 16
    problem, exact = manufactured_problem(vel=vel, affine=False)
    mesh = build_mesh(MeshSpec(1.0, 1.0, T, n, n, nt))
    ex = exact_trajectory(mesh, exact)
    worst = 0.0
    for m in range(1, mesh.Nt + 1):
        for a in (0, 1):
            res = residual_field(problem, mesh, a, m, ex[m, a], ex[m, 1 - a], ex[m - 1, a])
            worst = max(worst, float(np.abs(res).max()))
    return worst


def test_truncation_first_order_upwind():
    # tau = h/2: halving h should roughly halve the defect
    e = [manufactured_defect("upwind", n) for n in (8, 16, 32)]
    assert 1.5 < e[0] / e[1] < 2.6
    assert 1.5 < e[1] / e[2] < 2.6


def test_truncation_second_order_central():
    # zero velocities, tau = 4 h^2: halving h should quarter the defect
    e = [manufactured_defect("central", n) for n in (8, 16, 32)]
    assert 3.2 < e[0] / e[1] < 5.0
    assert 3.2 < e[1] / e[2] < 5.0
