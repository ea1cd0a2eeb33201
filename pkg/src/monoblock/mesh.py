"""Uniform rectangular space-time meshes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MeshSpec:
    """Rectangle (0, l1) x (0, l2), time horizon T, and subdivision counts."""

    l1: float
    l2: float
    T: float
    Nx: int
    Ny: int
    Nt: int


@dataclass(frozen=True)
class Mesh:
    spec: MeshSpec
    hx: float
    hy: float
    tau: float
    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    # full tensor grids, indexed [i, j] with i along x
    X: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)

    @property
    def Nx(self) -> int:
        return self.spec.Nx

    @property
    def Ny(self) -> int:
        return self.spec.Ny

    @property
    def Nt(self) -> int:
        return self.spec.Nt

    @property
    def Xi(self) -> np.ndarray:
        """x coordinates of interior points, shape (Nx-1, Ny-1)."""
        return self.X[1:-1, 1:-1]

    @property
    def Yi(self) -> np.ndarray:
        return self.Y[1:-1, 1:-1]

    @property
    def field_shape(self) -> tuple[int, int]:
        return (self.spec.Nx + 1, self.spec.Ny + 1)

    @property
    def interior_shape(self) -> tuple[int, int]:
        return (self.spec.Nx - 1, self.spec.Ny - 1)

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.field_shape, dtype=bool)
        mask[0, :] = mask[-1, :] = True
        mask[:, 0] = mask[:, -1] = True
        return mask


def build_mesh(spec: MeshSpec) -> Mesh:
    if spec.l1 <= 0 or spec.l2 <= 0 or spec.T <= 0:
        raise ValueError("domain extents and time horizon must be positive")
    if spec.Nx < 2 or spec.Ny < 2:
        raise ValueError("need at least 2 cells per spatial direction")
    if spec.Nt < 1:
        raise ValueError("need at least one time level")
    x = np.linspace(0.0, spec.l1, spec.Nx + 1)
    y = np.linspace(0.0, spec.l2, spec.Ny + 1)
    t = np.linspace(0.0, spec.T, spec.Nt + 1)
    X, Y = np.meshgrid(x, y, indexing="ij")
    return Mesh(
        spec=spec,
        hx=spec.l1 / spec.Nx,
        hy=spec.l2 / spec.Ny,
        tau=spec.T / spec.Nt,
        x=x,
        y=y,
        t=t,
        X=X,
        Y=Y,
    )


def classify(mesh: Mesh, i: int, j: int) -> str:
    """Return "boundary" for points on the edge of the closed mesh, else "interior"."""
    if not (0 <= i <= mesh.Nx and 0 <= j <= mesh.Ny):
        raise IndexError(f"point ({i}, {j}) outside the closed mesh")
    on_edge = i == 0 or i == mesh.Nx or j == 0 or j == mesh.Ny
    return "boundary" if on_edge else "interior"
