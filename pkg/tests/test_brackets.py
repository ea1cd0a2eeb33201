import numpy as np
import pytest

from monoblock.brackets import (
    Bracket,
    ConstructionError,
    auxiliary_upper,
    auxiliary_upper_rule,
    build_bracket,
    build_trajectory,
    constant_upper_rule,
    linear_upper_rule,
    lower_zero,
    upper_constant,
    upper_linear,
    zero_lower_rule,
)
from monoblock.mesh import MeshSpec, build_mesh
from monoblock.models import (
    EnzymeSubstrateParams,
    GasLiquidParams,
    VolterraLotkaParams,
    default_bracket,
    instantiate,
)
from monoblock.monotone import verify_ordered_pair
from monoblock.reaction import (
    ProblemSpec,
    QuasiMonotoneClass,
    constant_field,
    constant_space,
    psi_pair,
)

MESH = build_mesh(MeshSpec(1.0, 1.0, 0.5, 7, 7, 4))


def test_lower_zero_levels():
    for name in ("gas_liquid", "volterra_lotka", "belousov_zhabotinskii", "enzyme_substrate"):
        p = instantiate(name, mesh=MESH)
        at2 = lower_zero(p, MESH, 2)
        assert np.all(at2 == 0.0)
        at0 = lower_zero(p, MESH, 0)
        assert np.allclose(at0, psi_pair(p, MESH))


def test_lower_zero_refuses_positive_reaction_at_zero():
    zero = constant_field(0.0)
    p = ProblemSpec(
        kind=QuasiMonotoneClass.NONDECREASING,
        eps=(1.0, 1.0),
        vel=((zero, zero), (zero, zero)),
        f=(
            lambda x, y, t, u1, u2: 1.0 - np.asarray(u1, dtype=float),
            lambda x, y, t, u1, u2: -np.asarray(u2, dtype=float),
        ),
        df_own=(
            lambda x, y, t, u1, u2: np.full_like(np.asarray(u1, dtype=float), -1.0),
            lambda x, y, t, u1, u2: np.full_like(np.asarray(u2, dtype=float), -1.0),
        ),
        df_cross=(
            lambda x, y, t, u1, u2: np.zeros_like(np.asarray(u1, dtype=float)),
            lambda x, y, t, u1, u2: np.zeros_like(np.asarray(u2, dtype=float)),
        ),
        g=(zero, zero),
        psi=(constant_space(0.0), constant_space(0.0)),
        c_bound=(zero, zero),
        c_lower=(constant_field(-1.0), constant_field(-1.0)),
        q_bound=(zero, zero),
    )
    with pytest.raises(ConstructionError):
        lower_zero(p, MESH, 1)


def test_lower_zero_refuses_negative_data():
    p = instantiate("gas_liquid", mesh=MESH)
    from dataclasses import replace

    bad = replace(p, psi=(constant_space(-0.1), p.psi[1]))
    with pytest.raises(ConstructionError):
        lower_zero(bad, MESH, 1)
    bad = replace(p, g=(constant_field(-0.1), p.g[1]))
    with pytest.raises(ConstructionError):
        lower_zero(bad, MESH, 1)


def test_upper_linear_zero_data():
    zero = constant_field(0.0)
    zf = lambda x, y, t, u1, u2: np.zeros_like(np.asarray(u1, dtype=float))
    p = ProblemSpec(
        kind=QuasiMonotoneClass.NONDECREASING,
        eps=(1.0, 1.0),
        vel=((zero, zero), (zero, zero)),
        f=(zf, zf),
        df_own=(zf, zf),
        df_cross=(zf, zf),
        g=(zero, zero),
        psi=(constant_space(0.0), constant_space(0.0)),
        c_bound=(zero, zero),
        c_lower=(zero, zero),
        q_bound=(zero, zero),
    )
    traj = upper_linear(p, MESH, M=(0.0, 0.0))
    assert np.all(traj == 0.0)
    with pytest.raises(ConstructionError):
        upper_linear(p, MESH, M=(-1.0, 0.0))


def test_upper_linear_nonnegative_and_monotone_in_source():
    p = instantiate("gas_liquid", mesh=MESH)
    small = upper_linear(p, MESH, M=(1.0, 1.0))
    big = upper_linear(p, MESH, M=(3.0, 3.0))
    assert small.min() >= -1e-12
    # larger sources produce larger trajectories (inverse positivity at work)
    assert (small - big).max() <= 1e-12
    # defaults sample the reaction and come out positive here
    auto = upper_linear(p, MESH)
    assert auto.min() >= -1e-12


def test_upper_constant_gas_liquid():
    params = GasLiquidParams()
    rho2 = params.resolve_rho2(MESH)
    p = instantiate("gas_liquid", mesh=MESH)
    traj = upper_constant(p, MESH, (params.rho1, rho2))
    assert np.allclose(traj[0], psi_pair(p, MESH))
    assert np.all(traj[1:, 0] == params.rho1)
    assert np.all(traj[1:, 1] == rho2)
    # component-2 cap may grow freely; component 1 is pinned by the
    # component-2 reaction sign
    big = upper_constant(p, MESH, (params.rho1, 10.0 * rho2))
    bracket = build_bracket(
        p, MESH, zero_lower_rule(), constant_upper_rule((params.rho1, 10.0 * rho2))
    )
    for m in range(1, MESH.Nt + 1):
        assert verify_ordered_pair(
            p, MESH, bracket.upper[m], bracket.lower[m], m,
            prev=bracket.upper[m - 1], prev_lower=bracket.lower[m - 1],
        )


def test_upper_constant_refusals():
    p = instantiate("gas_liquid", mesh=MESH)
    # below the boundary maximum of component 2 (max g2 = 0.5)
    with pytest.raises(ConstructionError):
        upper_constant(p, MESH, (1.0, 0.4))
    # reaction sign broken: K1 above rho1 makes f2(K) negative
    with pytest.raises(ConstructionError):
        upper_constant(p, MESH, (2.0, 1.1))


def test_volterra_lotka_cap_window():
    params = VolterraLotkaParams()
    M1, M2 = params.resolve_M(MESH)
    assert abs(M2 - 2.0) < 1e-12
    assert abs(M1 - 2.0) < 1e-12
    # the window a1 M2 + 1 <= M1 <= (M2 - 1)/a2 closes to the single point 2
    assert params.a1 * M2 + 1.0 <= M1 + 1e-12
    assert M1 <= (M2 - 1.0) / params.a2 + 1e-12
    # residual inequalities at the caps
    assert M1 * (M1 - params.a1 * M2 - 1.0) >= -1e-12
    assert M2 * (M2 - params.a2 * M1 - 1.0) >= -1e-12
    p = instantiate("volterra_lotka", mesh=MESH)
    upper_constant(p, MESH, (M1, M2))
    # shrinking either cap below the window must be refused
    with pytest.raises((ConstructionError, ValueError)):
        upper_constant(p, MESH, (0.9, M2))


def test_volterra_lotka_empty_window_rejected():
    # the resolved M2 always satisfies the window when a1 a2 < 1, so the
    # only rejection path is the interaction product itself
    with pytest.raises(ValueError):
        VolterraLotkaParams(a1=2.0, a2=0.6).resolve_M(MESH)
    # near the boundary the window still closes
    M1, M2 = VolterraLotkaParams(a1=0.9, a2=0.9).resolve_M(MESH)
    assert M1 <= (M2 - 1.0) / 0.9 + 1e-9


def test_auxiliary_upper_enzyme():
    params = EnzymeSubstrateParams()
    p = instantiate("enzyme_substrate", mesh=MESH)
    M0 = params.resolve_M0()
    assert M0 > params.b1 * params.E0
    traj = auxiliary_upper(p, MESH, M0, params.E0)
    # component 1 solves the source-M0 linear scheme and stays nonnegative
    assert traj[:, 0].min() >= -1e-12
    # component 2 is the constant enzyme total after the initial level
    assert np.all(traj[1:, 1] == params.E0)
    assert np.allclose(traj[0], psi_pair(p, MESH))
    with pytest.raises(ConstructionError):
        auxiliary_upper(p, MESH, M0, 0.5 * params.E0)  # cap below initial data
    with pytest.raises(ValueError):
        EnzymeSubstrateParams(M0=0.9).resolve_M0()  # not above b1 E0


def test_build_trajectory_role_validation():
    p = instantiate("gas_liquid", mesh=MESH)
    with pytest.raises(ConstructionError):
        build_trajectory(p, MESH, constant_upper_rule((1.0, 1.0)), "lower")
    with pytest.raises(ConstructionError):
        build_trajectory(p, MESH, zero_lower_rule(), "upper")


def test_bracket_shape_validation():
    good = np.zeros((3, 2, 5, 5))
    Bracket(upper=good, lower=good.copy())
    with pytest.raises(ValueError):
        Bracket(upper=good, lower=np.zeros((3, 2, 5, 4)))
    with pytest.raises(ValueError):
        Bracket(upper=np.zeros((2, 5, 5)), lower=np.zeros((2, 5, 5)))


def test_build_bracket_defaults_all_models():
    for name in ("gas_liquid", "volterra_lotka", "belousov_zhabotinskii", "enzyme_substrate"):
        p = instantiate(name, mesh=MESH)
        lower_rule, upper_rule = default_bracket(name, mesh=MESH)
        bracket = build_bracket(p, MESH, lower_rule, upper_rule)
        assert bracket.upper.shape == (MESH.Nt + 1, 2) + MESH.field_shape
        assert (bracket.lower - bracket.upper).max() <= 1e-12
        for m in range(1, MESH.Nt + 1):
            assert verify_ordered_pair(
                p, MESH, bracket.upper[m], bracket.lower[m], m,
                prev=bracket.upper[m - 1], prev_lower=bracket.lower[m - 1],
            )


def test_build_bracket_rejects_invalid_upper():
    # BZ with K1 forced below a/b: f1(K1, 0) < 0, no longer an upper solution
    p = instantiate("belousov_zhabotinskii", mesh=MESH)
    with pytest.raises(ConstructionError):
        build_bracket(p, MESH, zero_lower_rule(), constant_upper_rule((0.98, 1.05)))


def test_rule_constructors():
    r = zero_lower_rule()
    assert r.kind == "zero_lower"
    r = linear_upper_rule((1.0, 2.0))
    assert r.kind == "linear_upper" and r.M == (1.0, 2.0)
    assert linear_upper_rule().M is None
    r = constant_upper_rule((3.0, 4.0))
    assert r.kind == "constant_upper" and r.K == (3.0, 4.0)
    r = auxiliary_upper_rule(1.05, 1.0)
    assert r.kind == "auxiliary_linear_upper"
    assert r.M0 == 1.05 and r.K == (None, 1.0)
