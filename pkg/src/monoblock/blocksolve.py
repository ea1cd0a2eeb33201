"""Direct tridiagonal solves for the per-line systems.

Every line system here is strictly diagonally dominant with margin 1/tau
(plus a nonnegative shift), so two-sweep elimination without pivoting is
stable. The batched variants run the same recurrences simultaneously for a
whole stack of independent lines, which is what the Jacobi sweep wants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TriDiag:
    """Tridiagonal matrix: sub/sup have one entry less than diag."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    @property
    def n(self) -> int:
        return self.diag.shape[-1]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        out = self.diag * x
        out[..., 1:] += self.sub * x[..., :-1]
        out[..., :-1] += self.sup * x[..., 1:]
        return out

    def dense(self) -> np.ndarray:
        if self.diag.ndim != 1:
            raise ValueError("dense() expects a single system, not a batch")
        a = np.diag(self.diag)
        a += np.diag(self.sub, -1)
        a += np.diag(self.sup, 1)
        return a


def dominance_margin(sys: TriDiag) -> np.ndarray:
    """Row-wise diagonal dominance margin diag - |sub| - |sup| (signed)."""
    margin = np.abs(sys.diag).astype(float)
    margin[..., 1:] -= np.abs(sys.sub)
    margin[..., :-1] -= np.abs(sys.sup)
    return margin


def check_dominance(sys: TriDiag) -> None:
    """Reject systems that are not (at least weakly) diagonally dominant.

    Assembled line systems are strictly dominant with margin 1/tau; that
    stronger property is audited where they are built. Here only a negative
    margin is treated as an assembly bug, so that weakly dominant systems
    (classic constant-coefficient rows) remain solvable; singularity is
    caught by the pivot guard in factor_tridiag.
    """
    if np.any(sys.diag <= 0):
        raise ValueError("nonpositive diagonal entry in line system")
    margin = dominance_margin(sys)
    if np.any(margin < 0):
        raise ValueError(
            "line system is not diagonally dominant "
            f"(worst margin {margin.min():.3e}); this signals an assembly bug"
        )


@dataclass(frozen=True)
class TriFactor:
    """LU factors of a tridiagonal system from elimination without pivoting.

    low holds the multipliers sub_k / dmod_{k-1}; dmod the modified diagonal;
    sup is carried through unchanged. Leading axes, if any, index a batch of
    independent systems.
    """

    low: np.ndarray
    dmod: np.ndarray
    sup: np.ndarray


def factor_tridiag(sys: TriDiag) -> TriFactor:
    n = sys.n
    dmod = np.array(sys.diag, dtype=float, copy=True)
    low = np.zeros_like(np.asarray(sys.sub, dtype=float))
    for k in range(1, n):
        low[..., k - 1] = sys.sub[..., k - 1] / dmod[..., k - 1]
        dmod[..., k] = sys.diag[..., k] - low[..., k - 1] * sys.sup[..., k - 1]
    if not np.all(np.isfinite(dmod)) or np.any(dmod == 0.0):
        raise ValueError("singular line system: elimination pivot vanished")
    return TriFactor(low=low, dmod=dmod, sup=np.asarray(sys.sup, dtype=float))


def solve_factored(fac: TriFactor, rhs: np.ndarray) -> np.ndarray:
    n = fac.dmod.shape[-1]
    y = np.array(rhs, dtype=float, copy=True)
    for k in range(1, n):
        y[..., k] -= fac.low[..., k - 1] * y[..., k - 1]
    x = y
    x[..., n - 1] /= fac.dmod[..., n - 1]
    for k in range(n - 2, -1, -1):
        x[..., k] = (x[..., k] - fac.sup[..., k] * x[..., k + 1]) / fac.dmod[..., k]
    return x


def solve_tridiag(sys: TriDiag, rhs: np.ndarray) -> np.ndarray:
    """Solve sys @ x = rhs by two-sweep elimination without pivoting.

    Raises ValueError when the system is not strictly diagonally dominant,
    since dominance is what justifies skipping pivoting here.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[-1] != sys.n:
        raise ValueError(f"rhs length {rhs.shape[-1]} does not match system size {sys.n}")
    check_dominance(sys)
    return solve_factored(factor_tridiag(sys), rhs)


class LineFactor:
    """Per-line factorization with plain-float inner loops.

    The Gauss-Seidel sweep solves one short line at a time; running the
    substitution recurrences over Python floats avoids numpy scalar overhead
    on these tiny systems.
    """

    __slots__ = ("low", "dmod", "sup", "n")

    def __init__(self, fac: TriFactor):
        if fac.dmod.ndim != 1:
            raise ValueError("LineFactor wraps a single line, not a batch")
        self.low = fac.low.tolist()
        self.dmod = fac.dmod.tolist()
        self.sup = fac.sup.tolist()
        self.n = len(self.dmod)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        y = np.asarray(rhs, dtype=float).tolist()
        low, dmod, sup, n = self.low, self.dmod, self.sup, self.n
        for k in range(1, n):
            y[k] -= low[k - 1] * y[k - 1]
        y[n - 1] /= dmod[n - 1]
        for k in range(n - 2, -1, -1):
            y[k] = (y[k] - sup[k] * y[k + 1]) / dmod[k]
        return np.array(y)


def inverse_positivity_check(sys: TriDiag, trials: int, rng=None) -> bool:
    """Sample nonnegative right-hand sides and confirm nonnegative solutions.

    A valid M-matrix has an entrywise nonnegative inverse, so every solve with
    rhs >= 0 must come back >= 0 up to rounding (slack 1e-13).
    """
    if rng is None:
        rng = np.random.default_rng(0)
    fac = factor_tridiag(sys)
    for _ in range(trials):
        rhs = rng.random(sys.n)
        x = solve_factored(fac, rhs)
        if np.any(x < -1e-13):
            return False
    return True
