import types

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from fpcoeffs import (AssemblyFailure, BadParameter, assemble, assemble_fd, build_mesh,
                      case_potential, dump_triplets, load_triplets, lowest_eigenpairs,
                      quadratic_potential)


def test_default_mesh_dof_count():
    m = build_mesh(10.0, 1000, 10, 21)
    assert m.n_interior == 9999
    assert len(m.nodes) == 10001


def test_single_hat():
    m = build_mesh(1.0, 2, 1, 3)
    assert m.n_interior == 1
    np.testing.assert_array_equal(m.interior_nodes, [0.0])


@pytest.mark.parametrize("args", [(10.0, 3, 10, 21), (10.0, 0, 2, 5), (10.0, 4, 0, 3),
                                  (10.0, 4, 3, 6), (-1.0, 4, 2, 5)])
def test_build_mesh_rejects(args):
    with pytest.raises(BadParameter):
        build_mesh(*args)


@settings(max_examples=30, deadline=None)
@given(R=st.floats(0.5, 20.0), half=st.integers(1, 40), p=st.integers(1, 10))
def test_mesh_invariants(R, half, p):
    m = build_mesh(R, 2 * half, p, 2 * p + 1)
    assert m.nodes[0] == -R and m.nodes[-1] == R
    assert np.all(np.diff(m.nodes) > 0)
    assert m.n_interior == 2 * half * p - 1
    assert 0.0 in m.edges
    np.testing.assert_array_equal(m.nodes, -m.nodes[::-1])
    np.testing.assert_array_equal(m.interior_nodes[m.mirror()], -m.interior_nodes)


def test_evaluate_reproduces_polynomials():
    m = build_mesh(2.0, 4, 3, 7)
    f = lambda v: (4.0 - v * v) * v  # cubic, zero at the Dirichlet ends
    pts = np.linspace(-2, 2, 37)
    np.testing.assert_allclose(m.evaluate(f(m.interior_nodes), pts), f(pts), atol=1e-13)


@pytest.fixture(scope="module")
def small_op():
    spec = case_potential("A", 1.0)
    return spec, assemble(build_mesh(10.0, 40, 4, 21), spec)


def test_assembled_matrices_symmetric_and_definite(small_op):
    _, op = small_op
    assert abs(op.A - op.A.T).max() == 0.0
    assert abs(op.B - op.B.T).max() == 0.0
    sla.cholesky(op.B.toarray())
    assert op.bandwidth == 9
    assert op.n == 40 * 4 - 1


def test_mass_row_sums_positive(small_op):
    _, op = small_op
    assert np.all(np.asarray(op.B.sum(axis=1)).ravel() > 0)


def test_banded_storage_matches(small_op):
    _, op = small_op
    ab = op.banded("A")
    u = ab.shape[0] - 1
    assert u == 4
    for k in range(u + 1):
        np.testing.assert_array_equal(ab[u - k, k:], op.A.diagonal(k))
    lam_b = sla.eig_banded(op.banded("A"), eigvals_only=True)
    np.testing.assert_allclose(np.sort(lam_b), np.linalg.eigvalsh(op.A.toarray()), atol=1e-9)


def test_quadratic_zero_mode():
    spec = quadratic_potential(1.0)
    op = assemble(build_mesh(10.0, 100, 4, 21), spec)
    lam = lowest_eigenpairs(op, 3, method="dense").eigenvalues
    assert abs(lam[0]) < 1e-8


def test_sqrt_maxwellian_nearly_in_kernel(case_a_small):
    spec, mesh, op, _ = case_a_small
    x = spec.sqrt_maxwellian(mesh.interior_nodes)
    r = np.linalg.norm(op.A @ x) / np.linalg.norm(op.B @ x)
    assert r < 1e-6


def test_non_finite_phi_is_an_assembly_failure():
    fake = types.SimpleNamespace(R=10.0, vartheta=1.0, phi=lambda v: np.full_like(v, np.nan))
    with pytest.raises(AssemblyFailure):
        assemble(build_mesh(10.0, 4, 2, 5), fake)
    with pytest.raises(AssemblyFailure):
        assemble_fd(10.0, 11, fake)


def test_domain_mismatch():
    spec = case_potential("A", 1.0, domain_R=10.0)
    with pytest.raises(BadParameter):
        assemble(build_mesh(8.0, 4, 2, 5), spec)


def test_fd_rejects_even_point_count():
    with pytest.raises(BadParameter):
        assemble_fd(10.0, 4000, quadratic_potential(1.0))


def test_fd_quadratic_first_eigenvalue():
    op = assemble_fd(10.0, 4001, quadratic_potential(1.0))
    lam = lowest_eigenpairs(op, 3).eigenvalues
    assert abs(lam[1] - 1.0) < 1e-4
    assert op.kind == "fd"


@pytest.mark.parametrize("p", [1, 2, 3])
def test_convergence_order(p):
    spec = quadratic_potential(1.0)
    errs = []
    for n in (20, 40, 80):
        op = assemble(build_mesh(10.0, n, p, 2 * p + 3), spec)
        errs.append(abs(lowest_eigenpairs(op, 3, method="dense").eigenvalues[1] - 1.0))
    for a, b in zip(errs, errs[1:]):
        # eigenvalue error is O(h^{2p})
        assert a / b >= 2 ** (2 * p) / 2


def test_dirichlet_truncation():
    lam = []
    for R, n in ((8.0, 800), (10.0, 1000)):
        spec = case_potential("A", 1.0, domain_R=R)
        lam.append(lowest_eigenpairs(assemble(build_mesh(R, n, 10, 21), spec), 3).eigenvalues[1])
    assert abs(lam[0] - lam[1]) / lam[1] < 1e-10


def test_variational_upper_bounds():
    spec = case_potential("A", 1.0)
    prev = None
    for n in (20, 40, 80):
        lam = lowest_eigenpairs(assemble(build_mesh(10.0, n, 2, 21), spec), 6, method="dense").eigenvalues
        assert np.all(lam >= -1e-10)
        if prev is not None:
            assert np.all(prev >= lam - 1e-10)
        prev = lam


def test_triplet_dump_roundtrip(tmp_path, small_op):
    _, op = small_op
    pa, pb = dump_triplets(op, tmp_path / "mats")
    first = open(pa).readline().split()
    assert len(first) == 3 and first[:2] == ["0", "0"]
    assert abs(load_triplets(pa, op.n) - op.A).max() == 0.0
    assert abs(load_triplets(pb, op.n) - op.B).max() == 0.0
    assert not list((tmp_path / "mats").glob("*.tmp"))
