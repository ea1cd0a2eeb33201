import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoblock.blocksolve import (
    LineFactor,
    TriDiag,
    check_dominance,
    dominance_margin,
    factor_tridiag,
    inverse_positivity_check,
    solve_factored,
    solve_tridiag,
)
from monoblock.oracle import dense_solve


def random_dominant(n, rng, margin=0.5):
    sub = rng.standard_normal(n - 1)
    sup = rng.standard_normal(n - 1)
    diag = np.zeros(n)
    diag[1:] += np.abs(sub)
    diag[:-1] += np.abs(sup)
    diag += margin + rng.random(n)
    return TriDiag(sub=sub, diag=diag, sup=sup)


def test_identity_solve():
    sys = TriDiag(sub=np.zeros(3), diag=np.ones(4), sup=np.zeros(3))
    rhs = np.array([3.0, -1.0, 0.5, 2.0])
    assert np.array_equal(solve_tridiag(sys, rhs), rhs)


def test_row_sum_system():
    sys = TriDiag(sub=np.array([-1.0, -1.0]), diag=np.array([2.0, 2.0, 2.0]),
                  sup=np.array([-1.0, -1.0]))
    x = solve_tridiag(sys, np.array([1.0, 0.0, 1.0]))
    assert np.allclose(x, [1.0, 1.0, 1.0], atol=1e-14)


def test_matches_dense_oracle():
    rng = np.random.default_rng(7)
    sys = random_dominant(50, rng)
    rhs = rng.standard_normal(50)
    x = solve_tridiag(sys, rhs)
    x_ref = dense_solve(sys.dense(), rhs)
    assert np.abs(x - x_ref).max() <= 1e-12
    # defect of the computed solution itself
    assert np.abs(sys.matvec(x) - rhs).max() <= 1e-12 * (1.0 + np.abs(rhs).max())


def test_solve_accuracy_random_sizes():
    rng = np.random.default_rng(21)
    for _ in range(20):
        n = int(rng.integers(2, 40))
        sys = random_dominant(n, rng)
        rhs = rng.standard_normal(n)
        x = solve_tridiag(sys, rhs)
        assert np.abs(sys.matvec(x) - rhs).max() <= 1e-12 * (1.0 + np.abs(rhs).max())


def test_dominance_rejected():
    sys = TriDiag(sub=np.array([-2.0]), diag=np.array([1.0, 1.0]), sup=np.array([-2.0]))
    with pytest.raises(ValueError):
        solve_tridiag(sys, np.array([1.0, 1.0]))
    margin = dominance_margin(sys)
    assert margin.min() < 0


def test_singular_weakly_dominant_rejected():
    # weak dominance on every row but singular: the pivot guard must fire
    sys = TriDiag(sub=np.array([-1.0]), diag=np.array([1.0, 1.0]), sup=np.array([-1.0]))
    with pytest.raises(ValueError):
        solve_tridiag(sys, np.array([1.0, 1.0]))


def test_rhs_length_checked():
    sys = TriDiag(sub=np.array([-1.0]), diag=np.array([3.0, 3.0]), sup=np.array([-1.0]))
    with pytest.raises(ValueError):
        solve_tridiag(sys, np.array([1.0, 2.0, 3.0]))


def test_batched_factor_matches_loop():
    rng = np.random.default_rng(3)
    systems = [random_dominant(6, rng) for _ in range(5)]
    batch = TriDiag(
        sub=np.stack([s.sub for s in systems]),
        diag=np.stack([s.diag for s in systems]),
        sup=np.stack([s.sup for s in systems]),
    )
    rhs = rng.standard_normal((5, 6))
    xb = solve_factored(factor_tridiag(batch), rhs)
    for k, s in enumerate(systems):
        xk = solve_tridiag(s, rhs[k])
        assert np.abs(xb[k] - xk).max() <= 1e-13


def test_line_factor_matches_batched():
    rng = np.random.default_rng(11)
    sys = random_dominant(9, rng)
    fac = factor_tridiag(sys)
    lf = LineFactor(fac)
    rhs = rng.standard_normal(9)
    assert np.abs(lf.solve(rhs) - solve_factored(fac, rhs)).max() <= 1e-13


def test_inverse_positivity_two_by_two():
    sys = TriDiag(sub=np.array([-1.0]), diag=np.array([2.0, 2.0]), sup=np.array([-1.0]))
    x = solve_tridiag(sys, np.array([1.0, 0.0]))
    assert np.allclose(x, [2.0 / 3.0, 1.0 / 3.0])
    assert inverse_positivity_check(sys, trials=20, rng=np.random.default_rng(0))


def test_inverse_positivity_counterexample():
    # positive off-diagonal: the inverse has a negative entry
    # [[2, 1], [1, 2]]^-1 = 1/3 [[2, -1], [-1, 2]]
    sys = TriDiag(sub=np.array([1.0]), diag=np.array([2.0, 2.0]), sup=np.array([1.0]))
    inv = np.linalg.inv(sys.dense())
    assert inv.min() < 0
    assert not inverse_positivity_check(sys, trials=50, rng=np.random.default_rng(1))


def test_inverse_positivity_random_m_matrices():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n = int(rng.integers(2, 12))
        sub = -rng.random(n - 1)
        sup = -rng.random(n - 1)
        diag = np.zeros(n)
        diag[1:] -= sub
        diag[:-1] -= sup
        diag += 0.1 + rng.random(n)
        sys = TriDiag(sub=sub, diag=diag, sup=sup)
        check_dominance(sys)
        assert inverse_positivity_check(sys, trials=10, rng=rng)


coeff = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_dominant_solve_property(data):
    # any strictly dominant system: solve agrees with the dense route and
    # leaves a tiny defect, whatever the off-diagonal signs
    n = data.draw(st.integers(min_value=1, max_value=20))
    sub = np.array(data.draw(st.lists(coeff, min_size=n - 1, max_size=n - 1)))
    sup = np.array(data.draw(st.lists(coeff, min_size=n - 1, max_size=n - 1)))
    margin = data.draw(st.floats(min_value=0.1, max_value=5.0, allow_nan=False))
    diag = np.full(n, margin)
    diag[1:] += np.abs(sub)
    diag[:-1] += np.abs(sup)
    sys = TriDiag(sub=sub, diag=diag, sup=sup)
    rhs = np.array(data.draw(st.lists(coeff, min_size=n, max_size=n)))
    x = solve_tridiag(sys, rhs)
    scale = max(1.0, float(np.abs(x).max()))
    assert np.abs(x - dense_solve(sys.dense(), rhs)).max() <= 1e-8 * scale
    assert np.abs(sys.dense() @ x - rhs).max() <= 1e-8 * scale * max(1.0, float(diag.max()))
