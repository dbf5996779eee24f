"""Fourier coefficients of the right-hand sides and truncated D, K series."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .discretize import Mesh
from .eigensolve import TOL_ZERO, SpectralDecomposition, with_zero_mode
from .errors import BadParameter, DivisionHazard, MeshMismatch, NoConvergence
from .potential import PotentialSpec

RULES = ("per-element-gauss", "composite-rectangle")
DEFAULT_RULE = "per-element-gauss"
ABS_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class RHS:
    which: str
    values: np.ndarray  # at every mesh node, boundary included
    func: Callable[[np.ndarray], np.ndarray]


def rhs_samples(spec: PotentialSpec, mesh: Mesh, which: str) -> RHS:
    """Right-hand side of the Schrödinger cell problem.

    ``chi``:   -(v - V) sqrt(M)
    ``kappa``: -(1/vartheta) W'(v) sqrt(M)

    The mean velocity V vanishes for symmetric potentials.
    """
    if which == "chi":
        V = spec.V
        def func(v):
            return -(v - V) * spec.sqrt_maxwellian(v)
    elif which == "kappa":
        def func(v):
            return -spec.dW(v) * spec.sqrt_maxwellian(v) / spec.vartheta
    else:
        raise BadParameter(f"unknown right-hand side {which!r}")
    return RHS(which=which, values=func(mesh.nodes), func=func)


def project(dec: SpectralDecomposition, rhs: RHS, mesh: Mesh,
            rule: str = DEFAULT_RULE) -> np.ndarray:
    """Quadrature of rhs * Psi_k over [-R, R] for every mode of ``dec``."""
    X = dec.eigenvectors
    if X.shape[0] != mesh.n_interior or rhs.values.shape != mesh.nodes.shape:
        raise MeshMismatch(f"eigenvectors have {X.shape[0]} rows, mesh has "
                           f"{mesh.n_interior} interior nodes")
    if rule == "composite-rectangle":
        # left-endpoint weights on the global node set; the last node gets none
        w = np.append(np.diff(mesh.nodes), 0.0)[1:-1]
        return (w * rhs.values[1:-1]) @ X
    if rule == "per-element-gauss":
        L, _ = mesh.quad_tables
        fq = rhs.func(mesh.quad_points) * mesh.quad_weights[None, :]
        U = np.zeros((len(mesh.nodes), X.shape[1]))
        U[1:-1] = X
        # psi at quadrature points: (E, q, k)
        psi = np.einsum("qi,eik->eqk", L, U[mesh.connectivity], optimize=True)
        return np.einsum("eq,eqk->k", fq, psi, optimize=True)
    raise BadParameter(f"unknown quadrature rule {rule!r}; expected one of {RULES}")


@dataclass(frozen=True, eq=False)
class FourierCoefficients:
    """Projections on the retained modes (zero mode excluded), n = 1..N."""

    eta: np.ndarray
    omega: np.ndarray
    quadrature_tag: str

    def __post_init__(self):
        if len(self.eta) != len(self.omega):
            raise BadParameter("eta and omega lengths differ")


def fourier_coefficients(dec: SpectralDecomposition, spec: PotentialSpec, mesh: Mesh,
                         rule: str = DEFAULT_RULE) -> FourierCoefficients:
    keep = dec.retained
    eta = project(dec, rhs_samples(spec, mesh, "chi"), mesh, rule)[keep]
    omega = project(dec, rhs_samples(spec, mesh, "kappa"), mesh, rule)[keep]
    return FourierCoefficients(eta=eta, omega=omega, quadrature_tag=rule)


@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    lambdas: np.ndarray
    eta: np.ndarray
    omega: np.ndarray
    D_partial: np.ndarray
    K_partial: np.ndarray
    N_auto: int | None = None

    @property
    def D(self) -> float:
        n = self.N_auto or len(self.D_partial)
        return float(self.D_partial[n - 1])

    @property
    def K(self) -> float:
        n = self.N_auto or len(self.K_partial)
        return float(self.K_partial[n - 1])


def auto_truncate(D_partial, K_partial, rel_tol: float, increments=None) -> int:
    """Smallest N whose last three increments of D and K are all below rel_tol * partial sum.

    ``increments`` optionally supplies the exact terms (dD, dK); differences of
    the partial sums vanish once a sum saturates in floating point, the terms
    themselves do not.
    """
    D = np.asarray(D_partial, dtype=float)
    K = np.asarray(K_partial, dtype=float)
    if len(D) < 3:
        raise BadParameter("auto truncation needs at least three retained modes")
    if increments is None:
        dD = np.diff(D, prepend=0.0)
        dK = np.diff(K, prepend=0.0)
    else:
        dD, dK = (np.asarray(a, dtype=float) for a in increments)
    for N in range(3, len(D) + 1):
        s = slice(N - 3, N)
        okD = np.all(np.abs(dD[s]) < max(rel_tol * abs(D[N - 1]), ABS_FLOOR))
        okK = np.all(np.abs(dK[s]) < max(rel_tol * abs(K[N - 1]), ABS_FLOOR))
        if okD and okK:
            return N
    raise NoConvergence(f"partial sums did not settle to rel_tol={rel_tol:g} within {len(D)} modes")


def truncated_coefficients(dec: SpectralDecomposition, eta, omega, N: int | None = None,
                           rel_tol: float | None = None,
                           tol_zero: float = TOL_ZERO) -> CoefficientSeries:
    """Partial sums D^n = sum eta_k^2 / lambda_k and K^n = sum eta_k omega_k / lambda_k.

    ``eta``/``omega`` are indexed like ``dec.retained``.  When ``rel_tol`` is
    given the stopping rule of :func:`auto_truncate` fixes ``N_auto``.
    """
    if dec.zero_mode_index is None:
        dec = with_zero_mode(dec, tol_zero)
    lam = dec.eigenvalues[dec.retained]
    eta = np.asarray(eta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if not (len(eta) == len(omega) == len(lam)):
        raise BadParameter("coefficient arrays do not match the retained modes")
    N = len(lam) if N is None else N
    if not 1 <= N <= len(lam):
        raise BadParameter(f"N={N} outside 1..{len(lam)}")
    lam, eta, omega = lam[:N], eta[:N], omega[:N]
    if np.any(lam <= tol_zero):
        raise DivisionHazard(f"retained eigenvalue {lam.min():.3g} is not above tol_zero={tol_zero:g}")
    dD = eta * eta / lam
    dK = eta * omega / lam
    D = np.cumsum(dD)
    K = np.cumsum(dK)
    n_auto = auto_truncate(D, K, rel_tol, (dD, dK)) if rel_tol is not None else None
    return CoefficientSeries(lambdas=lam, eta=eta, omega=omega, D_partial=D, K_partial=K,
                             N_auto=n_auto)
