import math

import numpy as np
import pytest
import scipy.sparse as sp

from hardylab.assembly import assemble_pencil, rayleigh_quotient
from hardylab.errors import DimensionMismatch, NotSPD
from hardylab.eigensolve import count_below, dense_oracle, smallest_eigenpair, solve_spd
from hardylab.geometry import DomainSpec, Grading, generate_mesh


def _laplacian_1d(n_el):
    h = 1.0 / n_el
    n = n_el - 1
    K = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]) / h
    M = sp.diags([np.ones(n - 1), 4 * np.ones(n), np.ones(n - 1)], [-1, 0, 1]) * h / 6
    return K.tocsr(), M.tocsr()


def _random_pencil(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    A = 0.5 * (B + B.T)
    C = rng.standard_normal((n, n))
    W = C @ C.T / n + np.eye(n)
    return A, W


def test_identity_pencil():
    r = smallest_eigenpair(sp.identity(5), sp.identity(5))
    assert np.isclose(r.mu, 1.0)
    assert np.isclose(np.linalg.norm(r.coeffs), 1.0)


def test_diagonal_pencil():
    r = smallest_eigenpair(sp.diags([3.0, 1.0, 2.0]), sp.identity(3))
    assert np.isclose(r.mu, 1.0)
    assert np.allclose(np.abs(r.coeffs), [0.0, 1.0, 0.0], atol=1e-8)


def test_laplacian_1d_gives_pi_squared():
    K, M = _laplacian_1d(200)
    r = smallest_eigenpair(K, M)
    assert abs(r.mu - math.pi**2) < 1e-3
    assert np.isclose(r.mu, dense_oracle(K, M)[0], rtol=0, atol=1e-8)


def test_result_invariants():
    K, M = _laplacian_1d(100)
    r = smallest_eigenpair(K, M, tol=1e-10)
    assert abs(r.coeffs @ (M @ r.coeffs) - 1.0) < 1e-12
    resid = np.linalg.norm(K @ r.coeffs - r.mu * (M @ r.coeffs))
    assert np.isclose(resid, r.residual, rtol=1e-6, atol=1e-14)
    assert r.residual <= 1e-10 * max(1.0, np.linalg.norm(K @ r.coeffs))
    # sign normalization: first non-negligible entry positive
    assert r.coeffs[np.flatnonzero(np.abs(r.coeffs) > 1e-12)[0]] > 0


@pytest.mark.parametrize("seed", range(5))
def test_random_indefinite_pencils_match_dense(seed):
    A, W = _random_pencil(50, seed)
    r = smallest_eigenpair(sp.csr_matrix(A), sp.csr_matrix(W))
    assert abs(r.mu - dense_oracle(A, W)[0]) < 1e-8


def test_pencil_with_lambda_matches_dense_and_rayleigh():
    mesh = generate_mesh(DomainSpec.half_disk(1.0), 0.3, Grading(0.5, 6))
    p = assemble_pencil(mesh)
    for lam in (-10.0, 0.0, 20.0):
        r = smallest_eigenpair(p.operator(lam), p.W)
        assert abs(r.mu - dense_oracle(p.operator(lam), p.W)[0]) < 1e-8
        assert abs(rayleigh_quotient(p, r.coeffs, lam) - r.mu) <= 10 * 1e-10 * max(1.0, abs(r.mu))


def test_pcg_inner_solver_agrees():
    K, M = _laplacian_1d(60)
    lu = smallest_eigenpair(K, M)
    cg = smallest_eigenpair(K, M, inner="pcg")
    assert np.isclose(lu.mu, cg.mu, rtol=0, atol=1e-8)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        smallest_eigenpair(sp.identity(3), sp.identity(4))
    with pytest.raises(DimensionMismatch):
        dense_oracle(np.eye(2), np.eye(3))


def test_dense_oracle_examples():
    assert np.allclose(dense_oracle(np.eye(3), np.eye(3)), [1, 1, 1])
    assert np.allclose(dense_oracle(np.diag([1.0, 4.0]), np.diag([1.0, 2.0])), [1, 2])
    with pytest.raises(NotSPD):
        dense_oracle(np.eye(2), np.diag([1.0, -1.0]))


def test_count_below_is_sylvester_inertia():
    A, W = _random_pencil(30, 7)
    ev = dense_oracle(A, W)
    for sigma in (ev[0] - 1.0, 0.5 * (ev[3] + ev[4]), ev[-1] + 1.0):
        assert count_below(sp.csr_matrix(A), sp.csr_matrix(W), sigma) == int(np.sum(ev < sigma))


def test_solve_spd_examples():
    b = np.array([1.0, -2.0, 3.0])
    assert np.allclose(solve_spd(sp.identity(3), b), b)
    assert np.allclose(solve_spd(sp.diags([2.0]), np.array([4.0])), [2.0])
    assert np.allclose(solve_spd(sp.identity(3), np.zeros(3)), 0.0)


def test_solve_spd_on_assembled_mass():
    mesh = generate_mesh(DomainSpec.half_disk(1.0), 0.2, Grading(0.5, 8))
    M = assemble_pencil(mesh).M
    b = np.random.default_rng(3).standard_normal(M.shape[0])
    x = solve_spd(M, b, tol=1e-10)
    assert np.linalg.norm(M @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_solve_spd_rejects_indefinite():
    with pytest.raises(NotSPD):
        solve_spd(sp.diags([1.0, -1.0]), np.ones(2))
    S = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(NotSPD):
        solve_spd(S, np.array([1.0, -1.0]))
