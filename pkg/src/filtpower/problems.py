"""Benchmark problems and the independent brute-force oracle.

Each problem carries two spectra on purpose. `discrete` is the exact
spectrum of the finite-difference operator (closed-form stencil values
where they exist, the in-repo Jacobi eigensolver for the oscillator) and
is what the solver must hit tightly. `continuum` is the underlying
physics; its gap to `discrete` is discretization error and is reported,
never mixed into solver tolerances.

Degeneracy is recorded positionally: `discrete` keeps one entry per state
(so a doubly degenerate level appears twice) and `labels` names each
state, which lets tests assert multiplicities without picking basis
vectors inside a degenerate eigenspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .operators import DenseOperator, GridOperator, GridSpec, materialize
from .power import normalize

__all__ = [
    "BenchmarkProblem",
    "simple_matrix",
    "box_1d",
    "ring",
    "harmonic",
    "cubic_box",
    "from_samples",
    "make_problem",
    "brute_force_spectrum",
    "CATALOG",
    "REFERENCE_TABLES",
    "reference_rows",
]

JACOBI_CAP = 5000


@dataclass(frozen=True)
class BenchmarkProblem:
    """An operator plus its known spectra.

    discrete and continuum are index-aligned with labels (quantum numbers:
    ints for 1D, (nx, ny, nz) tuples for the cube, signed ints for the
    ring where +n and -n share a level). Problems are immutable and
    picklable, so scan workers can take them whole.
    """

    name: str
    family: str
    operator: DenseOperator | GridOperator
    discrete: np.ndarray | None
    continuum: np.ndarray | None
    labels: tuple = ()

    def eigenfunction(self, label):
        """Analytic eigenstate for a label, sampled on the grid and
        normalized, or None where no closed form exists (ring states are
        degenerate pairs, file problems are arbitrary)."""
        if self.family == "matrix":
            s = 1.0 / math.sqrt(2.0)
            basis = {
                1: np.array([0.0, s, -s]),
                2: np.array([1.0, 0.0, 0.0]),
                3: np.array([0.0, s, s]),
            }
            return basis.get(label)
        if self.family == "box1d":
            x = self.operator.grid.axis_coords(0)
            return normalize(np.sin(label * np.pi * x), self.operator.dv)
        if self.family == "harmonic":
            x = self.operator.grid.axis_coords(0)
            return normalize(_hermite_gaussian(x, label), self.operator.dv)
        if self.family == "cubic":
            nx, ny, nz = label
            x, y, z = self.operator.grid.coords()
            psi = np.sin(nx * np.pi * x) * np.sin(ny * np.pi * y) * np.sin(nz * np.pi * z)
            return normalize(psi, self.operator.dv)
        return None


def _hermite_gaussian(x: np.ndarray, n: int) -> np.ndarray:
    """h_n(x) exp(-x^2/2) via the recurrence h_{k+1} = 2x h_k - 2k h_{k-1}.

    Unnormalized; fine for the low n the oscillator tests use.
    """
    if n < 0:
        raise ValueError("need n >= 0")
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev * np.exp(-0.5 * x * x)
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h * np.exp(-0.5 * x * x)


def _dirichlet_stencil_levels(count: int, dx: float) -> np.ndarray:
    """Exact eigenvalues of -(1/2) d2/dx2 on a unit Dirichlet interval:
    (1 - cos(n pi dx)) / dx^2 for n = 1..count."""
    n = np.arange(1, count + 1)
    return (1.0 - np.cos(n * np.pi * dx)) / (dx * dx)


def simple_matrix() -> BenchmarkProblem:
    """A 3x3 block-diagonal matrix with spectrum {1, 2, 3}.

    Small enough to hand-check every behavior of the filtered iteration:
    targeting, substep-count selection effects, certificates.
    """
    m = np.array([[2.0, 0.0, 0.0], [0.0, 2.0, 1.0], [0.0, 1.0, 2.0]])
    spectrum = np.array([1.0, 2.0, 3.0])
    return BenchmarkProblem(
        name="simple-matrix",
        family="matrix",
        operator=DenseOperator(m),
        discrete=spectrum,
        continuum=spectrum.copy(),
        labels=(1, 2, 3),
    )


def box_1d(dx: float = 0.02) -> BenchmarkProblem:
    """Free particle in the unit Dirichlet box: H = -(1/2) d2/dx2."""
    grid = GridSpec.interval(0.0, 1.0, dx)
    count = grid.npoints
    n = np.arange(1, count + 1)
    return BenchmarkProblem(
        name="box1d",
        family="box1d",
        operator=GridOperator(grid),
        discrete=_dirichlet_stencil_levels(count, dx),
        continuum=0.5 * (n * np.pi) ** 2,
        labels=tuple(int(i) for i in n),
    )


def ring(dx: float = 0.01, length: float = 1.0) -> BenchmarkProblem:
    """Free particle on a periodic ring.

    Spectrum: 0 (simple) and 2 pi^2 n^2 / L^2 (doubly degenerate), with
    the stencil analogue (1 - cos(2 pi n dx / L)) / dx^2. The default
    spacing is 0.01: that is the grid the reference table values belong
    to. The zero mode is real but unreachable by the filter (f(0) = 0).
    """
    grid = GridSpec.ring(length, dx)
    npts = grid.npoints
    levels = []
    for j in range(npts):
        label = j if 2 * j <= npts else j - npts
        eig = (1.0 - math.cos(2.0 * math.pi * j / npts)) / (dx * dx)
        cont = 2.0 * (math.pi * label / length) ** 2
        levels.append((eig, label, cont))
    levels.sort(key=lambda t: (t[0], t[1]))
    return BenchmarkProblem(
        name="ring",
        family="ring",
        operator=GridOperator(grid),
        discrete=np.array([t[0] for t in levels]),
        continuum=np.array([t[2] for t in levels]),
        labels=tuple(t[1] for t in levels),
    )


def harmonic(dx: float = 0.1, half_width: float = 10.0) -> BenchmarkProblem:
    """Harmonic oscillator V(x) = x^2/2 on [-half_width, half_width].

    No closed-form stencil spectrum exists here, so discrete comes from
    the Jacobi oracle (cached per grid: the decomposition is seconds of
    work at the default 199 points).
    """
    grid = GridSpec.interval(-half_width, half_width, dx)
    x = grid.axis_coords(0)
    op = GridOperator(grid, 0.5 * x * x)
    discrete = _harmonic_levels(dx, half_width)
    count = grid.npoints
    return BenchmarkProblem(
        name="harmonic",
        family="harmonic",
        operator=op,
        discrete=discrete,
        continuum=np.arange(count) + 0.5,
        labels=tuple(range(count)),
    )


@lru_cache(maxsize=8)
def _harmonic_levels(dx: float, half_width: float) -> np.ndarray:
    grid = GridSpec.interval(-half_width, half_width, dx)
    x = grid.axis_coords(0)
    vals, _ = _jacobi(materialize(GridOperator(grid, 0.5 * x * x)))
    vals = np.sort(vals)
    vals.flags.writeable = False
    return vals


def cubic_box(dx: float = 0.05) -> BenchmarkProblem:
    """Free particle in the unit Dirichlet cube.

    Separable: every discrete level is a sum of three 1D stencil levels,
    and permutations of (nx, ny, nz) are exactly degenerate.
    """
    grid = GridSpec.box3d(0.0, 1.0, dx)
    per_axis = grid.shape[0]
    one = _dirichlet_stencil_levels(per_axis, dx)
    levels = []
    for i in range(1, per_axis + 1):
        for j in range(1, per_axis + 1):
            for k in range(1, per_axis + 1):
                eig = one[i - 1] + one[j - 1] + one[k - 1]
                cont = 0.5 * math.pi ** 2 * (i * i + j * j + k * k)
                levels.append((eig, (i, j, k), cont))
    levels.sort(key=lambda t: (t[0], t[1]))
    return BenchmarkProblem(
        name="cubic",
        family="cubic",
        operator=GridOperator(grid),
        discrete=np.array([t[0] for t in levels]),
        continuum=np.array([t[2] for t in levels]),
        labels=tuple(t[1] for t in levels),
    )


def from_samples(x, potential, name: str = "tabulated") -> BenchmarkProblem:
    """Problem from tabulated potential samples on a uniform Dirichlet grid.

    The x column fixes the grid: it must be uniformly spaced. No oracle
    spectrum is attached (callers can run brute_force_spectrum when the
    size allows).
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(potential, dtype=float)
    if x.ndim != 1 or x.size < 2 or x.shape != v.shape:
        raise ValueError("need two equal-length columns with at least two samples")
    steps = np.diff(x)
    dx = float(steps[0])
    if dx <= 0.0 or not np.allclose(steps, dx, rtol=0.0, atol=1e-9 * max(1.0, abs(dx))):
        raise ValueError("x samples must be uniformly spaced and increasing")
    grid = GridSpec(shape=(x.size,), dx=dx, bc="dirichlet", origin=(float(x[0]),))
    return BenchmarkProblem(
        name=name,
        family="file",
        operator=GridOperator(grid, v),
        discrete=None,
        continuum=None,
        labels=(),
    )


CATALOG = {
    "simple-matrix": simple_matrix,
    "box1d": box_1d,
    "ring": ring,
    "harmonic": harmonic,
    "cubic": cubic_box,
}


def make_problem(name: str, dx: float | None = None) -> BenchmarkProblem:
    """Build a catalog problem, optionally at a non-default grid spacing."""
    if name not in CATALOG:
        raise KeyError(name)
    if name == "simple-matrix":
        if dx is not None:
            raise ValueError("simple-matrix has no grid spacing")
        return simple_matrix()
    factory = CATALOG[name]
    return factory() if dx is None else factory(dx=dx)


# ---------------------------------------------------------------------------
# brute-force oracle


def brute_force_spectrum(op, max_dim: int = JACOBI_CAP) -> list:
    """Full eigendecomposition by cyclic Jacobi rotations.

    Deliberately independent of the power-iteration machinery: this is
    the cross-check, so it shares no code path with the thing it checks.
    Returns [(eigenvalue, eigenvector), ...] sorted ascending. Dimension
    is capped: Jacobi is O(n^3) per sweep and the oracle is for problems
    small enough to verify exhaustively.
    """
    if op.dim > max_dim:
        raise ValueError(f"dimension {op.dim} exceeds the brute-force cap {max_dim}")
    vals, vecs = _jacobi(materialize(op, max_dim=max_dim))
    order = np.argsort(vals)
    return [(float(vals[i]), vecs[:, i].copy()) for i in order]


def _jacobi(matrix: np.ndarray):
    """Cyclic-by-row Jacobi on a symmetric matrix.

    Terminates when the off-diagonal Frobenius norm falls below
    1e-13 * ||A||_F (one decade under the documented 1e-12 bound, bought
    by at most one extra sweep thanks to the method's quadratic tail).
    """
    a = np.array(matrix, dtype=float, copy=True)
    n = a.shape[0]
    vecs = np.eye(n)
    if n == 1:
        return np.diag(a).copy(), vecs
    fro = float(np.linalg.norm(a))
    if fro == 0.0:
        return np.zeros(n), vecs
    stop = 1e-13 * fro
    skip = stop / (n * n)
    for _ in range(60):
        off2 = float((a * a).sum() - (np.diag(a) ** 2).sum())
        if math.sqrt(max(off2, 0.0)) <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                v_p = vecs[:, p].copy()
                v_q = vecs[:, q].copy()
                vecs[:, p] = c * v_p - s * v_q
                vecs[:, q] = s * v_p + c * v_q
    else:
        raise RuntimeError("Jacobi sweep limit reached before the off-diagonal target")
    return np.diag(a).copy(), vecs


# ---------------------------------------------------------------------------
# stored reference tables (published benchmark values for the catalog)

REFERENCE_TABLES = {
    1: ("box1d", [
        (1, 4.933179),
        (2, 19.713247),
        (3, 44.281873),
        (4, 78.542094),
        (5, 122.358708),
    ]),
    2: ("ring", [
        (1, 19.732716),
        (2, 78.852987),
        (3, 177.127493),
        (4, 314.168389),
    ]),
    3: ("harmonic", [
        (0, 0.499687),
        (1, 1.498437),
        (2, 2.495937),
        (3, 3.492195),
        (4, 4.487217),
        (5, 5.480985),
        (6, 6.473401),
    ]),
    4: ("cubic", [
        ((1, 1, 1), 14.773991),
        ((1, 1, 2), 29.426721),
        ((1, 2, 2), 44.079451),
        ((1, 1, 3), 53.446710),
        ((2, 2, 2), 58.732179),
        ((1, 2, 3), 68.099436),
    ]),
}


def reference_rows(table: int):
    """(problem, rows) for a stored table; rows are
    (label, level_index, published_value) with level_index into the
    problem's discrete/continuum arrays."""
    if table not in REFERENCE_TABLES:
        raise KeyError(table)
    family, entries = REFERENCE_TABLES[table]
    problem = make_problem(family)
    rows = [(label, problem.labels.index(label), value) for label, value in entries]
    return problem, rows
