"""Reference values that bypass the spectral pipeline entirely.

In one dimension the drift cell problem integrates in closed form, so

    K* = (1/vartheta) * int (v - V)^2 M(v) dv,    V = int v M(v) dv,

needs nothing but quadrature of the Maxwellian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergentQuadrature
from .potential import PotentialSpec
from .quadrature import composite_gauss

ORACLE_RTOL = 1e-8


@dataclass(frozen=True)
class OracleResult:
    K_star: float
    quad_error_estimate: float
    K_rectangle: float


def _drift_integral(spec: PotentialSpec, x: np.ndarray, w: np.ndarray) -> float:
    e = np.exp(-(spec.W(x) - spec.w_ref) / spec.vartheta)
    mass = w @ e
    V = (w @ (x * e)) / mass
    return float((w @ ((x - V) ** 2 * e)) / mass / spec.vartheta)


def drift_oracle(spec: PotentialSpec, panels: int = 200, points: int = 32,
                 rtol: float = ORACLE_RTOL, rect_points: int = 20001) -> OracleResult:
    """Drift coefficient from the explicit 1D formula.

    Composite Gauss-Legendre at ``panels`` and ``2 * panels`` panels; their
    difference is the error estimate.  A composite rectangle value on a
    uniform grid is reported alongside.
    """
    R = spec.R
    k1 = _drift_integral(spec, *composite_gauss(-R, R, panels, points, (0.0,)))
    k2 = _drift_integral(spec, *composite_gauss(-R, R, 2 * panels, points, (0.0,)))
    err = abs(k2 - k1)
    if not math.isfinite(k2) or err > rtol * abs(k2):
        raise NonConvergentQuadrature(f"nested drift quadratures differ by {err:.3g} (K* = {k2:.6g})")
    xr = np.linspace(-R, R, rect_points)
    wr = np.full(rect_points, xr[1] - xr[0])
    wr[-1] = 0.0
    return OracleResult(K_star=k2, quad_error_estimate=err, K_rectangle=_drift_integral(spec, xr, wr))


def quadratic_reference(vartheta: float, n_eigs: int = 6) -> tuple[float, float, np.ndarray]:
    """Exact (D, K, eigenvalues) for W = v^2/2.

    chi = -v M solves the cell problem, so D = int v^2 M = vartheta, K = 1,
    and the Schrödinger spectrum is 0, 1, 2, ...
    """
    return float(vartheta), 1.0, np.arange(n_eigs, dtype=float)
