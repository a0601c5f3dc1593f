"""Operators the solver iterates with.

Everything downstream touches an operator through four things: ``apply``,
``dim``, ``dv``, and ``shifted``. Two concrete kinds are provided: a dense
symmetric matrix, and a finite-difference Hamiltonian -(1/2)laplacian + V
on a uniform grid with Dirichlet or periodic ends.

Flat grid vectors are row-major with x the fastest axis: for a 3D grid the
flat index is ix + nx*(iy + ny*iz). Dirichlet grids store interior points
only; the boundary zeros are implicit in the stencil.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridSpec",
    "DenseOperator",
    "GridOperator",
    "materialize",
]

_BOUNDARY_KINDS = ("dirichlet", "periodic")


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid geometry.

    shape holds the number of stored points per axis, in (x,) or (x, y, z)
    order. origin is the coordinate of the first stored point along each
    axis. Only 1D and 3D grids exist here because nothing in the problem
    catalog needs 2D.
    """

    shape: tuple
    dx: float
    bc: str
    origin: tuple

    def __post_init__(self):
        if self.bc not in _BOUNDARY_KINDS:
            raise ValueError(f"bc must be one of {_BOUNDARY_KINDS}, got {self.bc!r}")
        if not self.dx > 0.0:
            raise ValueError("dx must be positive")
        shape = tuple(int(n) for n in self.shape)
        origin = tuple(float(c) for c in self.origin)
        if len(shape) not in (1, 3):
            raise ValueError("only 1D and 3D grids are supported")
        if any(n < 1 for n in shape):
            raise ValueError("every axis needs at least one stored point")
        if len(origin) != len(shape):
            raise ValueError("origin must give one coordinate per axis")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "origin", origin)

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def npoints(self) -> int:
        return int(math.prod(self.shape))

    @property
    def dv(self) -> float:
        """Volume element of one grid cell."""
        return self.dx ** self.ndim

    def axis_coords(self, axis: int = 0) -> np.ndarray:
        return self.origin[axis] + self.dx * np.arange(self.shape[axis])

    def coords(self) -> tuple:
        """Coordinate arrays for every stored point, each flat of length npoints.

        Returned in (x,) or (x, y, z) order, consistent with the x-fastest
        flat layout.
        """
        axes = [self.axis_coords(a) for a in range(self.ndim)]
        if self.ndim == 1:
            return (axes[0].copy(),)
        # mesh axes ordered (z, y, x) so that C-order ravel walks x fastest
        mesh = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
        return (mesh[2].ravel(), mesh[1].ravel(), mesh[0].ravel())

    @classmethod
    def interval(cls, lo: float, hi: float, dx: float) -> "GridSpec":
        """Dirichlet grid on [lo, hi]; stores the interior points only."""
        n = _count_cells(lo, hi, dx)
        if n < 2:
            raise ValueError("interval too short for any interior point")
        return cls(shape=(n - 1,), dx=dx, bc="dirichlet", origin=(lo + dx,))

    @classmethod
    def ring(cls, length: float, dx: float) -> "GridSpec":
        """Periodic grid of the given circumference, starting at 0."""
        n = _count_cells(0.0, length, dx)
        return cls(shape=(n,), dx=dx, bc="periodic", origin=(0.0,))

    @classmethod
    def box3d(cls, lo: float, hi: float, dx: float) -> "GridSpec":
        """Dirichlet cube [lo, hi]^3, interior points only."""
        n = _count_cells(lo, hi, dx)
        if n < 2:
            raise ValueError("cube too short for any interior point")
        m = n - 1
        return cls(shape=(m, m, m), dx=dx, bc="dirichlet", origin=(lo + dx,) * 3)


def _count_cells(lo: float, hi: float, dx: float) -> int:
    if not hi > lo:
        raise ValueError("need hi > lo")
    n = (hi - lo) / dx
    if abs(n - round(n)) > 1e-9 * max(1.0, abs(n)):
        raise ValueError(f"dx={dx} does not evenly divide [{lo}, {hi}]")
    return round(n)


def neighbor_sum(arr: np.ndarray, bc: str) -> np.ndarray:
    """Sum of the nearest neighbors along every axis of a grid-shaped array.

    Dirichlet treats out-of-range neighbors as zero; periodic wraps. The
    array axes are (x,), or (z, y, x) for 3D data stored x-fastest.
    """
    out = np.zeros_like(arr)
    for ax in range(arr.ndim):
        if bc == "periodic":
            out += np.roll(arr, 1, axis=ax)
            out += np.roll(arr, -1, axis=ax)
        else:
            head = tuple(
                slice(1, None) if a == ax else slice(None) for a in range(arr.ndim)
            )
            tail = tuple(
                slice(None, -1) if a == ax else slice(None) for a in range(arr.ndim)
            )
            out[head] += arr[tail]
            out[tail] += arr[head]
    return out


@dataclass(frozen=True)
class DenseOperator:
    """A real symmetric matrix, applied directly."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        scale = float(np.abs(m).max()) if m.size else 0.0
        if not np.allclose(m, m.T, atol=1e-12 * max(1.0, scale), rtol=0.0):
            raise ValueError("matrix must be symmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dv(self) -> float:
        return 1.0

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def shifted(self, offset: float) -> "DenseOperator":
        """H + offset*I; eigenvalues move by offset, eigenvectors stay."""
        if offset == 0.0:
            return self
        return DenseOperator(self.matrix + offset * np.eye(self.dim))


@dataclass(frozen=True)
class GridOperator:
    """H = -(1/2) laplacian + V on a GridSpec.

    potential is a flat array over the stored points, or None for free
    motion. The kinetic term uses the standard second-difference stencil,
    so the exact eigenvalues are the closed-form stencil values the
    problems module exposes.
    """

    grid: GridSpec
    potential: np.ndarray | None = None

    def __post_init__(self):
        if self.potential is not None:
            p = np.asarray(self.potential, dtype=float)
            if p.shape != (self.grid.npoints,):
                raise ValueError(
                    f"potential has shape {p.shape}, grid stores {self.grid.npoints} points"
                )
            object.__setattr__(self, "potential", p)

    @property
    def dim(self) -> int:
        return self.grid.npoints

    @property
    def dv(self) -> float:
        return self.grid.dv

    def apply(self, v: np.ndarray) -> np.ndarray:
        g = self.grid
        a = np.asarray(v, dtype=float).reshape(g.shape[::-1])
        ns = neighbor_sum(a, g.bc)
        out = (2.0 * g.ndim * a - ns) / (2.0 * g.dx * g.dx)
        out = out.ravel()
        if self.potential is not None:
            out = out + self.potential * v
        return out

    def shifted(self, offset: float) -> "GridOperator":
        """Fold a constant shift into the potential."""
        if offset == 0.0:
            return self
        base = self.potential if self.potential is not None else 0.0
        return GridOperator(self.grid, base + offset * np.ones(self.dim))


def materialize(op, max_dim: int = 5000) -> np.ndarray:
    """Dense matrix of an operator, built by applying it to unit vectors.

    Capped because the result is O(dim^2) memory and downstream users
    (the Jacobi oracle, the matrix-power fast path) are O(dim^3).
    """
    n = op.dim
    if n > max_dim:
        raise ValueError(f"operator dimension {n} exceeds the materialization cap {max_dim}")
    if isinstance(op, DenseOperator):
        return op.matrix.copy()
    out = np.empty((n, n))
    unit = np.zeros(n)
    for j in range(n):
        unit[j] = 1.0
        out[:, j] = op.apply(unit)
        unit[j] = 0.0
    return out
