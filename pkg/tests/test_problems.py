"""Benchmark problems, the Jacobi oracle, and the stored reference tables.

The oracle gets tested against numpy's LAPACK wrapper here exactly once;
everywhere else it is the independent reference the solver is measured
against, so it must earn that standing on its own.
"""

import dataclasses
import math

import numpy as np
import pytest

from filtpower import (
    CATALOG,
    GridOperator,
    GridSpec,
    box_1d,
    brute_force_spectrum,
    cubic_box,
    from_samples,
    harmonic,
    make_problem,
    materialize,
    rayleigh_quotient,
    ring,
    simple_matrix,
)
from filtpower.problems import (
    JACOBI_CAP,
    REFERENCE_TABLES,
    _dirichlet_stencil_levels,
    _jacobi,
    reference_rows,
)

PI2 = math.pi * math.pi

# ground-state values on the default grids, frozen from the first
# converged Jacobi runs and cross-checked against solver output
HARMONIC_E0 = 0.4996873043212062
GAUSS_RQ = 0.4996877602539869  # Rayleigh quotient of exp(-x^2/2), dx=0.1


def test_jacobi_matches_lapack_on_random_symmetric():
    rng = np.random.default_rng(11)
    s = rng.normal(size=(40, 40))
    a = s + s.T
    vals, vecs = _jacobi(a)
    got = np.sort(vals)
    want = np.linalg.eigvalsh(a)
    scale = float(np.linalg.norm(a))
    assert np.max(np.abs(got - want)) <= 1e-10 * scale
    # eigenvectors actually diagonalize
    for i in range(40):
        r = a @ vecs[:, i] - vals[i] * vecs[:, i]
        assert np.linalg.norm(r) <= 1e-9 * scale


def test_jacobi_on_trivial_matrices():
    vals, vecs = _jacobi(np.diag([3.0, 1.0, 2.0]))
    assert sorted(vals) == [1.0, 2.0, 3.0]
    assert np.array_equal(vecs, np.eye(3))
    vals, _ = _jacobi(np.zeros((4, 4)))
    assert np.array_equal(vals, np.zeros(4))
    vals, _ = _jacobi(np.array([[7.0]]))
    assert vals[0] == 7.0


def test_brute_force_spectrum_pairs():
    pairs = brute_force_spectrum(simple_matrix().operator)
    assert [e for e, _ in pairs] == pytest.approx([1.0, 2.0, 3.0], abs=1e-12)
    m = materialize(simple_matrix().operator)
    for e, v in pairs:
        assert np.linalg.norm(m @ v - e * v) < 1e-10


def test_brute_force_cap():
    grid = GridSpec.interval(0.0, 1.0, 2.0**-13)  # 8191 points
    op = GridOperator(grid)
    assert op.dim > JACOBI_CAP
    with pytest.raises(ValueError):
        brute_force_spectrum(op)


def test_box_two_routes_agree():
    # closed-form stencil eigenvalues vs the Jacobi decomposition of the
    # same matrix: independent derivations, one spectrum
    box = box_1d()
    vals, _ = _jacobi(materialize(box.operator))
    got = np.sort(vals)
    assert np.max(np.abs(got - box.discrete) / box.discrete) <= 1e-10


def test_box_continuum_levels():
    box = box_1d()
    assert box.continuum[0] == pytest.approx(PI2 / 2, rel=1e-15)
    assert box.continuum[:5] == pytest.approx(
        [0.5 * PI2 * n * n for n in range(1, 6)], rel=1e-15
    )
    assert box.labels[:3] == (1, 2, 3)


def test_ring_structure():
    r = ring()
    assert r.discrete[0] == 0.0
    assert r.labels[0] == 0
    # degenerate pairs, negative label first within a level
    assert r.discrete[1] == pytest.approx(r.discrete[2], rel=1e-15)
    assert (r.labels[1], r.labels[2]) == (-1, 1)
    assert np.all(np.diff(r.discrete) >= -1e-12)
    assert r.continuum[2] == pytest.approx(2 * PI2, rel=1e-14)


def test_ring_default_spacing_is_the_reference_grid():
    # the stored table belongs to dx = 0.01; at dx = 0.02 the first level
    # lands on a visibly different value (19.713 vs 19.733). rel 1e-9 is
    # loose enough to swallow the 1 - cos cancellation, tight enough to
    # tell the grids apart by five orders of magnitude.
    assert ring().discrete[1] == pytest.approx(19.732715717328226, rel=1e-9)
    assert ring(dx=0.02).discrete[1] == pytest.approx(19.713246713804863, rel=1e-9)


def test_harmonic_ground_state_and_cache():
    h = harmonic()
    assert h.discrete[0] == pytest.approx(HARMONIC_E0, abs=1e-9)
    assert h.continuum[0] == 0.5
    # Jacobi output is cached per grid and served read-only
    assert harmonic().discrete is h.discrete
    with pytest.raises(ValueError):
        h.discrete[0] = 0.0


def test_harmonic_gaussian_rayleigh_quotient():
    h = harmonic()
    x = h.operator.grid.axis_coords(0)
    assert rayleigh_quotient(h.operator, np.exp(-0.5 * x * x)) == pytest.approx(
        GAUSS_RQ, abs=1e-10
    )


def test_harmonic_eigenfunctions():
    h = harmonic()
    phi3 = h.eigenfunction(3)
    interior = phi3[np.abs(phi3) > 1e-8]
    sign_changes = int(np.sum(np.diff(np.sign(interior)) != 0))
    assert sign_changes == 3
    phi0 = h.eigenfunction(0)
    phi1 = h.eigenfunction(1)
    phi2 = h.eigenfunction(2)
    dv = h.operator.dv
    assert float(phi0 @ phi0) * dv == pytest.approx(1.0, abs=1e-12)
    assert abs(float(phi0 @ phi1) * dv) < 1e-12  # exact by parity
    assert abs(float(phi0 @ phi2) * dv) < 1e-6


def test_cubic_levels_and_degeneracy():
    c = cubic_box()
    assert len(c.discrete) == 19**3
    assert len(c.labels) == 19**3
    assert np.all(np.diff(c.discrete) >= -1e-12)
    one = _dirichlet_stencil_levels(19, 0.05)
    want = np.sort(
        np.add.outer(np.add.outer(one, one), one).ravel()
    )
    assert c.discrete == pytest.approx(want, rel=1e-13)
    assert c.labels.index((1, 1, 1)) == 0
    assert c.continuum[0] == pytest.approx(1.5 * PI2, rel=1e-14)
    # permutations of one triple share the level exactly
    for perm in ((1, 1, 2), (1, 2, 1), (2, 1, 1)):
        i = c.labels.index(perm)
        assert c.discrete[i] == pytest.approx(c.discrete[c.labels.index((1, 1, 2))], rel=1e-14)


def test_cubic_eigenfunction_is_stencil_exact():
    c = cubic_box()
    i = c.labels.index((1, 1, 2))
    phi = c.eigenfunction((1, 1, 2))
    r = c.operator.apply(phi) - c.discrete[i] * phi
    assert np.linalg.norm(r) / np.linalg.norm(phi) < 1e-9


def test_discretization_error_grows_with_level():
    box = box_1d()
    rel = np.abs(box.discrete[:5] - box.continuum[:5]) / box.continuum[:5]
    assert np.all(np.diff(rel) > 0)

    h = harmonic()
    rel = np.abs(h.discrete[:7] - h.continuum[:7]) / h.continuum[:7]
    assert np.all(np.diff(rel) > 0)

    r = ring()
    idx = [r.labels.index(n) for n in (1, 2, 3, 4)]
    rel = np.abs(r.discrete[idx] - r.continuum[idx]) / r.continuum[idx]
    assert np.all(np.diff(rel) > 0)


def test_from_samples():
    x = np.arange(1, 50) * 0.02
    v = x * x
    p = from_samples(x, v, name="well")
    assert p.name == "well"
    assert p.family == "file"
    assert p.discrete is None and p.continuum is None
    assert p.labels == ()
    assert p.operator.dim == 49
    assert p.operator.grid.dx == pytest.approx(0.02)
    assert p.eigenfunction(0) is None


def test_from_samples_validation():
    x = np.arange(1, 50) * 0.02
    with pytest.raises(ValueError):
        from_samples(x, x[:-1])
    with pytest.raises(ValueError):
        from_samples([0.5], [1.0])
    bad = x.copy()
    bad[7] += 1e-3
    with pytest.raises(ValueError):
        from_samples(bad, x * x)
    with pytest.raises(ValueError):
        from_samples(x[::-1], x * x)


def test_make_problem():
    assert set(CATALOG) == {"simple-matrix", "box1d", "ring", "harmonic", "cubic"}
    assert make_problem("box1d", dx=0.1).operator.dim == 9
    assert make_problem("simple-matrix").name == "simple-matrix"
    with pytest.raises(KeyError):
        make_problem("torus")
    with pytest.raises(ValueError):
        make_problem("simple-matrix", dx=0.1)


def test_simple_matrix_eigenpairs():
    p = simple_matrix()
    m = materialize(p.operator)
    assert np.trace(m) == 6.0
    s = 1.0 / math.sqrt(2.0)
    want = {1: [0.0, s, -s], 2: [1.0, 0.0, 0.0], 3: [0.0, s, s]}
    for label, vec in want.items():
        phi = p.eigenfunction(label)
        assert phi == pytest.approx(vec, abs=1e-15)
        assert m @ phi == pytest.approx(float(label) * phi, abs=1e-14)
    assert p.eigenfunction(9) is None


def test_ring_has_no_closed_form_eigenfunction():
    assert ring().eigenfunction(1) is None


def test_reference_tables_match_discrete_spectra():
    # stencil tables (1, 2, 4) reproduce their closed forms to rounding;
    # the oscillator table carries ~2e-5 provenance fuzz at higher n, so
    # it gets the benchmark tolerance instead
    for table in sorted(REFERENCE_TABLES):
        tol = 1e-4 if table == 3 else 1e-6
        problem, rows = reference_rows(table)
        for label, idx, published in rows:
            assert problem.labels[idx] == label
            got = problem.discrete[idx]
            assert abs(got - published) / published < tol, (table, label)
    with pytest.raises(KeyError):
        reference_rows(9)


def test_problems_are_immutable():
    p = simple_matrix()
    with pytest.raises(dataclasses.FrozenInstanceError):
        p.name = "other"
