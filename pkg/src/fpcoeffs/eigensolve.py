"""Lowest eigenpairs of the pencil (A, B), zero-mode detection and parity checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .discretize import DiscreteOperator, Mesh
from .errors import BadParameter, FactorizationFailure, NoConvergence, TunnellingCollapse
from .potential import PotentialSpec

log = logging.getLogger(__name__)

TOL_ZERO = 1e-8
S_TOL = 1e-4
DENSE_LIMIT = 2000
SIGN_THRESHOLD = 1e-3


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, B-orthonormal
    residuals: np.ndarray
    method: str
    zero_mode_index: int | None = None
    gap: float | None = None

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def retained(self) -> np.ndarray:
        """Indices of the modes entering the coefficient sums (all but the zero mode)."""
        idx = np.arange(len(self.eigenvalues))
        if self.zero_mode_index is None:
            return idx[1:]
        return idx[idx != self.zero_mode_index]


def fix_signs(X: np.ndarray, threshold: float = SIGN_THRESHOLD) -> np.ndarray:
    """Flip columns so the leftmost entry of significant size is positive.

    Entries below ``threshold * max|x|`` are ignored; far in the Dirichlet
    tails they carry only rounding noise.
    """
    X = np.array(X, copy=True)
    for k in range(X.shape[1]):
        col = X[:, k]
        big = np.flatnonzero(np.abs(col) >= threshold * np.abs(col).max())
        if col[big[0]] < 0:
            X[:, k] = -col
    return X


def _residuals(op: DiscreteOperator, lam: np.ndarray, X: np.ndarray) -> np.ndarray:
    BX = op.B @ X
    R = op.A @ X - BX * lam[None, :]
    return np.linalg.norm(R, axis=0) / np.linalg.norm(BX, axis=0)


def backward_errors(op: DiscreteOperator, dec: SpectralDecomposition) -> np.ndarray:
    """Normwise backward errors ||A x - lam B x|| / ((||A|| + |lam| ||B||) ||x||), 1-norms of A, B.

    Unlike the plain residual this is independent of the scale of A, which
    grows like h^-2 under refinement.
    """
    X = dec.eigenvectors
    lam = dec.eigenvalues
    nA = abs(op.A).sum(axis=0).max()
    nB = abs(op.B).sum(axis=0).max()
    r = np.linalg.norm(op.A @ X - (op.B @ X) * lam[None, :], axis=0)
    return r / ((nA + np.abs(lam) * nB) * np.linalg.norm(X, axis=0))


def _finish(op, lam, X, method) -> SpectralDecomposition:
    order = np.argsort(lam, kind="stable")
    lam = np.asarray(lam)[order]
    X = X[:, order]
    # B-normalize; solvers already return B-orthonormal vectors up to rounding
    X = X / np.sqrt(np.einsum("ik,ik->k", X, op.B @ X))[None, :]
    X = fix_signs(X)
    return SpectralDecomposition(eigenvalues=lam, eigenvectors=X,
                                 residuals=_residuals(op, lam, X), method=method)


def _dense(op: DiscreteOperator, count: int, shift: float) -> SpectralDecomposition:
    """Dense solve of the inverted pencil B x = mu (A - shift B) x.

    Plain ``eigh(A, B)`` has an absolute eigenvalue error of order eps * lambda_max,
    and lambda_max ~ Phi(R) is large; the inverted pencil keeps the error
    near eps * |shift| for the wanted end of the spectrum.
    """
    n = op.n
    B = op.B.toarray()
    try:
        mu, X = sla.eigh(B, op.A.toarray() - shift * B, subset_by_index=[n - count, n - 1])
    except sla.LinAlgError as exc:
        raise FactorizationFailure(f"A - ({shift}) B is not positive definite: {exc}") from exc
    return _finish(op, shift + 1.0 / mu, X, "dense")


def _lanczos(op: DiscreteOperator, count: int, shift: float, tol: float,
             max_dim: int | None, seed: int) -> SpectralDecomposition:
    """Shift-invert Lanczos on (A - shift B)^{-1} B in the B inner product.

    Every new Lanczos vector is reorthogonalized twice against the whole basis.
    The basis grows until the ``count`` wanted Ritz pairs pass the residual
    test ``beta_m |s_mk| <= tol |theta_k|``.
    """
    A, B = op.A, op.B
    n = op.n
    try:
        lu = splu(sp.csc_matrix(A - shift * B))
    except RuntimeError as exc:
        raise FactorizationFailure(f"A - ({shift}) B could not be factored: {exc}") from exc
    if not np.all(np.isfinite(lu.U.diagonal())) or np.any(lu.U.diagonal() == 0):
        raise FactorizationFailure("A - shift*B is singular")

    m_max = min(n, max_dim or max(20 * count, 400))
    m_check = min(m_max, max(2 * count + 20, 40))
    Q = np.zeros((n, m_max + 1))
    BQ = np.zeros((n, m_max + 1))
    alpha = np.zeros(m_max)
    beta = np.zeros(m_max)
    rng = np.random.default_rng(seed)

    def new_start(j):
        for _ in range(5):
            q = rng.standard_normal(n)
            for _ in range(2):
                q -= Q[:, :j] @ (BQ[:, :j].T @ q)
            bq = B @ q
            nrm = np.sqrt(q @ bq)
            if nrm > 1e-8:
                return q / nrm, bq / nrm
        raise NoConvergence("could not extend the Krylov basis")

    Q[:, 0], BQ[:, 0] = new_start(0)
    j = 0
    while True:
        w = lu.solve(BQ[:, j])
        alpha[j] = w @ BQ[:, j]
        for _ in range(2):
            w -= Q[:, :j + 1] @ (BQ[:, :j + 1].T @ w)
        bw = B @ w
        b = np.sqrt(max(w @ bw, 0.0))
        j += 1
        if b <= 1e-12 * max(abs(alpha[j - 1]), 1.0) and j < m_max:
            # invariant subspace: restart in its orthogonal complement
            beta[j - 1] = 0.0
            Q[:, j], BQ[:, j] = new_start(j)
        else:
            beta[j - 1] = b
            Q[:, j] = w / b if b > 0 else 0.0
            BQ[:, j] = bw / b if b > 0 else 0.0
        if j >= m_check or j == m_max:
            theta, S = sla.eigh_tridiagonal(alpha[:j], beta[:j - 1])
            lam = shift + 1.0 / theta
            want = np.argsort(lam)[:count]
            err = np.abs(beta[j - 1] * S[-1, want])
            if len(want) == count and np.all(err <= tol * np.abs(theta[want])):
                X = Q[:, :j] @ S[:, want]
                log.debug("lanczos converged with basis size %d", j)
                return _finish(op, lam[want], X, "lanczos")
            if j == m_max:
                raise NoConvergence(
                    f"shift-invert Lanczos did not converge with {j} vectors "
                    f"(worst estimate {np.max(err / np.abs(theta[want])):.3g})")
            m_check = min(m_max, j + max(count, 20))


def lowest_eigenpairs(op: DiscreteOperator, count: int, tol: float = 1e-12,
                      method: str = "auto", shift: float = -1.0,
                      max_dim: int | None = None, seed: int = 0) -> SpectralDecomposition:
    """The ``count`` algebraically smallest eigenpairs of A x = lambda B x.

    ``method`` is 'dense', 'lanczos' or 'auto' (dense up to 2000 unknowns).
    Eigenvectors are B-orthonormal with a deterministic sign convention.
    """
    if count < 2:
        raise BadParameter(f"count must be >= 2, got {count}")
    if count > op.n:
        raise BadParameter(f"count={count} exceeds the problem size {op.n}")
    if method == "auto":
        method = "dense" if op.n <= DENSE_LIMIT else "lanczos"
    if method == "dense":
        return _dense(op, count, shift)
    if method == "lanczos":
        return _lanczos(op, count, shift, tol, max_dim, seed)
    raise BadParameter(f"unknown eigensolver {method!r}")


def identify_zero_mode(dec: SpectralDecomposition, tol_zero: float = TOL_ZERO) -> tuple[int, float]:
    """Locate the kernel direction and the spectral gap above it.

    The zero mode is the eigenvalue of smallest magnitude; it must lie within
    ``tol_zero`` of 0 and the next eigenvalue must exceed ``10 tol_zero``.
    """
    lam = np.asarray(dec.eigenvalues)
    if len(lam) == 0:
        raise BadParameter("empty decomposition")
    idx = int(np.argmin(np.abs(lam)))
    if abs(lam[idx]) > tol_zero:
        raise NoConvergence(
            f"no eigenvalue within {tol_zero:g} of zero (smallest |lambda| = {abs(lam[idx]):.3g})")
    if idx + 1 >= len(lam):
        raise BadParameter("need at least one eigenvalue above the zero mode")
    nxt = lam[idx + 1]
    if nxt < 10 * tol_zero or (idx > 0 and lam[idx - 1] > -10 * tol_zero):
        raise TunnellingCollapse(
            f"spectral gap collapsed: lambda = {lam[idx]:.3g}, next = {nxt:.3g} "
            f"(tol_zero = {tol_zero:g})")
    return idx, float(nxt - lam[idx])


def with_zero_mode(dec: SpectralDecomposition, tol_zero: float = TOL_ZERO) -> SpectralDecomposition:
    idx, gap = identify_zero_mode(dec, tol_zero)
    return replace(dec, zero_mode_index=idx, gap=gap)


@dataclass(frozen=True)
class SymmetryDiagnostic:
    scores: tuple[float, ...]
    parities: tuple[int, ...]
    s_tol: float

    @property
    def broken(self) -> bool:
        return any(s > self.s_tol for s in self.scores)


def parity_scores(X: np.ndarray, op: DiscreteOperator) -> tuple[np.ndarray, np.ndarray]:
    """Distance of each column to the nearest even or odd function, in relative L2.

    Uses the exact node reflection of the symmetric mesh and the mass matrix.
    """
    Xr = X[op.mesh.mirror()]
    B = op.B
    nrm = np.einsum("ik,ik->k", X, B @ X)
    scores, parity = [], []
    for p in (1, -1):
        D = X - p * Xr
        scores.append(np.sqrt(np.maximum(np.einsum("ik,ik->k", D, B @ D), 0) / nrm))
    scores = np.array(scores)
    parity = np.where(scores[0] <= scores[1], 1, -1)
    return scores.min(axis=0), parity


def symmetry_diagnostic(dec: SpectralDecomposition, op: DiscreteOperator, spec: PotentialSpec,
                        count: int = 2, s_tol: float = S_TOL) -> SymmetryDiagnostic:
    """Parity check of the lowest ``count`` eigenfunctions of a symmetric potential.

    A broken parity for the first two modes is the signature of the tunnelling
    breakdown: the computed pair no longer resolves 0 and lambda_1.
    """
    if not spec.symmetric:
        raise BadParameter("symmetry diagnostic needs a symmetric potential (delta = 0)")
    s, p = parity_scores(dec.eigenvectors[:, :count], op)
    return SymmetryDiagnostic(scores=tuple(float(v) for v in s),
                              parities=tuple(int(v) for v in p), s_tol=s_tol)
