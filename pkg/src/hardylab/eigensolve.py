"""Smallest eigenpair of a symmetric pencil ``A x = mu W x`` with ``W`` SPD.

``A`` may be indefinite.  The shift is placed below the smallest
eigenvalue using Sylvester inertia (negative pivots of a symmetric LU),
then shift-and-invert iteration converges to the bottom of the spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DimensionMismatch, NoConvergence, NotSPD

DEFAULT_TOL = 1e-10
MAX_TIGHTENINGS = 8


@dataclass(frozen=True, eq=False)
class EigResult:
    mu: float
    coeffs: np.ndarray
    residual: float
    iterations: int
    shift: float = math.nan


def _sign_normalize(x):
    nz = np.flatnonzero(np.abs(x) > 1e-14 * np.abs(x).max())
    if len(nz) and x[nz[0]] < 0:
        return -x
    return x


def solve_spd(S, b, tol=1e-12, max_iter=None, x0=None):
    """Jacobi-preconditioned conjugate gradients.

    Raises :class:`NotSPD` on a non-positive curvature direction, which is
    how the eigensolver's PCG path detects a shift above the spectrum.
    """
    S = sp.csr_matrix(S) if sp.issparse(S) else np.asarray(S, dtype=float)
    b = np.asarray(b, dtype=float)
    n = len(b)
    if S.shape != (n, n):
        raise DimensionMismatch(f"matrix {S.shape} vs rhs {b.shape}")
    if max_iter is None:
        max_iter = max(10 * n, 100)
    d = S.diagonal() if sp.issparse(S) else np.diag(S).copy()
    if np.any(d <= 0):
        raise NotSPD("non-positive diagonal entry")
    inv_d = 1.0 / d
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - S @ x
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros(n)
    z = inv_d * r
    p = z.copy()
    rz = r @ z
    for k in range(max_iter):
        if np.linalg.norm(r) <= tol * bnorm:
            return x
        Sp = S @ p
        curv = p @ Sp
        if curv <= 0:
            raise NotSPD("matrix is not positive definite (non-positive curvature)")
        alpha = rz / curv
        x += alpha * p
        r -= alpha * Sp
        z = inv_d * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    if np.linalg.norm(r) <= tol * bnorm:
        return x
    raise NoConvergence(f"PCG did not reach {tol:g} in {max_iter} iterations", max_iter)


def dense_oracle(A, W):
    """Full generalized spectrum via ``W = L L^T`` and ``eigh(L^-1 A L^-T)``."""
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    W = W.toarray() if sp.issparse(W) else np.asarray(W, dtype=float)
    if A.shape != W.shape or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"shapes {A.shape} and {W.shape}")
    if A.shape[0] > 2000:
        raise ValueError("dense oracle limited to n <= 2000")
    try:
        L = sla.cholesky(W, lower=True)
    except sla.LinAlgError as exc:
        raise NotSPD(str(exc)) from exc
    X = sla.solve_triangular(L, A, lower=True)
    C = sla.solve_triangular(L, X.T, lower=True)
    C = 0.5 * (C + C.T)
    return np.sort(sla.eigvalsh(C))


class _ShiftedSolver:
    """Factorisation of ``A - sigma W`` with its Sylvester inertia."""

    def __init__(self, A, W, sigma):
        S = (A - sigma * W).tocsc()
        self.sigma = sigma
        self.lu = spla.splu(
            S,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
        if not np.array_equal(self.lu.perm_r, self.lu.perm_c):
            raise _InertiaUnavailable()
        self.negatives = int(np.count_nonzero(self.lu.U.diagonal() < 0))

    def solve(self, b):
        return self.lu.solve(b)


class _InertiaUnavailable(Exception):
    pass


class _PCGShifted:
    def __init__(self, A, W, sigma, tol):
        self.S = (A - sigma * W).tocsr()
        self.sigma = sigma
        self.tol = tol
        self.negatives = None

    def solve(self, b):
        return solve_spd(self.S, b, tol=self.tol)


def _try_factor(A, W, sigma):
    try:
        return _ShiftedSolver(A, W, sigma)
    except RuntimeError:  # exactly singular: sigma is an eigenvalue
        return None


def _valid_shift(A, W, upper, hint=None):
    """Factorisation at some shift with no eigenvalue below it.

    Shifts are tried just below ``upper`` (a Rayleigh quotient) first and
    then geometrically further down; ``hint``, a known lower bound of the
    spectrum, is used as soon as the search passes above it.
    """
    scale = max(1.0, abs(upper))
    step = 0.05 * scale
    while True:
        sigma = upper - step
        if hint is not None and hint >= sigma:
            sigma, hint = hint, None
        if not math.isfinite(sigma):
            raise NoConvergence("could not find a shift below the spectrum")
        solver = _try_factor(A, W, sigma)
        if solver is not None and solver.negatives == 0:
            return solver
        if solver is not None:
            upper = sigma
            step *= 8.0
        else:
            step *= 1.5


def count_below(A, W, sigma):
    """Number of eigenvalues of the pencil strictly below ``sigma`` (Sylvester)."""
    solver = _try_factor(sp.csr_matrix(A, dtype=float), sp.csr_matrix(W, dtype=float), sigma)
    return None if solver is None else solver.negatives


def smallest_eigenpair(A, W, tol=DEFAULT_TOL, max_iter=None, x0=None, inner="lu", shift_hint=None):
    """Algebraically smallest eigenpair of ``A x = mu W x``.

    Returns a :class:`EigResult` whose vector is W-normalised and sign
    normalised (first non-negligible entry positive), with
    ``||A x - mu W x||_2 <= tol * max(1, ||A x||_2)``.  ``x0`` and ``shift_hint`` warm-start
    a sequence of related solves.
    """
    A = sp.csr_matrix(A, dtype=float)
    W = sp.csr_matrix(W, dtype=float)
    n = A.shape[0]
    if A.shape != W.shape or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"shapes {A.shape} and {W.shape}")
    if n == 0:
        raise DimensionMismatch("empty pencil")
    if max_iter is None:
        max_iter = 10 * n
    if x0 is None:
        x = 1.0 + 0.1 * np.cos(np.arange(n))
    else:
        x = np.array(x0, dtype=float)
    wn = math.sqrt(float(x @ (W @ x)))
    if not wn > 0:
        raise NotSPD("W is not positive definite on the start vector")
    x /= wn
    rq = float(x @ (A @ x))

    if inner == "pcg":
        solver = _PCGShifted(A, W, _pcg_bottom_shift(A, W, rq, tol), tol=1e-3 * tol)
    else:
        try:
            solver = _valid_shift(A, W, rq, shift_hint)
        except _InertiaUnavailable:
            solver = _PCGShifted(A, W, _pcg_bottom_shift(A, W, rq, tol), tol=1e-3 * tol)
    sigma = solver.sigma

    mu_prev = math.inf
    res = math.inf
    best, stalled = math.inf, 0
    tightenings = 0
    for it in range(1, max_iter + 1):
        y = solver.solve(W @ x)
        x = y / math.sqrt(float(y @ (W @ y)))
        Ax = A @ x
        mu = float(x @ Ax)
        res = float(np.linalg.norm(Ax - mu * (W @ x)))
        # absolute for O(1) pencils, relative to ||Ax|| for badly scaled ones
        if res <= tol * max(1.0, float(np.linalg.norm(Ax))):
            return EigResult(mu, _sign_normalize(x), res, it, sigma)
        if res < 0.99 * best:
            best, stalled = res, 0
        else:
            stalled += 1
            if stalled > 200:
                raise NoConvergence(f"residual stagnated at {res:.3e}", it)
        settled = abs(mu_prev - mu) <= 1e-3 * (mu - sigma)
        mu_prev = mu
        if settled and solver.negatives is not None and tightenings < MAX_TIGHTENINGS:
            # move the shift up towards mu; keep it only if still below the spectrum
            gap = mu - sigma
            for frac in (1e-3, 1e-2, 0.1, 0.5):
                trial = _try_factor(A, W, mu - frac * gap)
                if trial is not None and trial.negatives == 0:
                    solver, sigma = trial, trial.sigma
                    tightenings += 1
                    break
            else:
                tightenings += 0.25  # failed attempts count too, but less
    raise NoConvergence(f"residual {res:.3e} after {max_iter} iterations", max_iter)


def _pcg_bottom_shift(A, W, upper, tol):
    """Shift below the spectrum, detected by PCG breakdown on ``A - sigma W``."""
    scale = max(1.0, abs(upper))
    step = 0.1 * scale
    probe = np.ones(A.shape[0])
    while True:
        sigma = upper - step
        try:
            solve_spd((A - sigma * W).tocsr(), probe, tol=1e-8)
            # a single right-hand side cannot prove definiteness; back off further
            sigma -= step
            return sigma
        except NotSPD:
            upper = sigma
            step *= 4.0
        except NoConvergence:
            step *= 4.0
