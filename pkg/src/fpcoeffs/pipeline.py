"""End-to-end computation for one parameter point.

potential -> mesh and pencil -> lowest eigenpairs -> zero mode -> Fourier
coefficients -> truncated D, K, checked against the drift oracle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientSeries, fourier_coefficients, truncated_coefficients
from .config import RunConfig
from .discretize import DiscreteOperator, Mesh, assemble
from .eigensolve import (SpectralDecomposition, SymmetryDiagnostic, backward_errors,
                         lowest_eigenpairs, symmetry_diagnostic, with_zero_mode)
from .errors import FPCoeffsError, NoConvergence, TunnellingCollapse
from .oracle import OracleResult, drift_oracle
from .potential import PotentialSpec

log = logging.getLogger(__name__)


@dataclass(eq=False)
class PointResult:
    config: RunConfig
    spec: PotentialSpec
    mesh: Mesh
    dec: SpectralDecomposition | None = None
    oracle: OracleResult | None = None
    symmetry: SymmetryDiagnostic | None = None
    series: CoefficientSeries | None = None
    backward_error: float = math.nan
    status: str = "ok"
    error: FPCoeffsError | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def positive_eigenvalues(self) -> np.ndarray:
        """Eigenvalues above the zero mode (index-based when it was not identified)."""
        if self.dec is None:
            return np.array([])
        lam = self.dec.eigenvalues
        if self.dec.zero_mode_index is not None:
            return lam[self.dec.retained]
        return lam[1:]

    @property
    def D(self) -> float:
        return self.series.D if self.series is not None else math.nan

    @property
    def K(self) -> float:
        return self.series.K if self.series is not None else math.nan

    @property
    def K_star(self) -> float:
        return self.oracle.K_star if self.oracle is not None else math.nan

    @property
    def rel_err(self) -> float:
        return abs(self.K - self.K_star) / abs(self.K_star)

    @property
    def N_auto(self) -> int | None:
        return self.series.N_auto if self.series is not None else None

    @property
    def symmetry_broken(self) -> bool:
        return bool(self.symmetry is not None and self.symmetry.broken)

    @property
    def drift_ok(self) -> bool:
        return bool(self.rel_err < self.config.drift_tol)


def solve_operator(cfg: RunConfig) -> tuple[PotentialSpec, DiscreteOperator]:
    spec = cfg.potential()
    return spec, assemble(cfg.mesh(), spec)


def compute_point(cfg: RunConfig) -> PointResult:
    """Run one point.

    Parameter and assembly errors propagate.  Tunnelling collapse and
    convergence failures past the eigensolve are recorded on the result, with
    whatever was computed before them kept for reporting.
    """
    spec, op = solve_operator(cfg)
    res = PointResult(config=cfg, spec=spec, mesh=op.mesh)
    res.oracle = drift_oracle(spec, rtol=cfg.oracle_rtol)
    res.dec = lowest_eigenpairs(op, min(cfg.n_max + 1, op.n), method=cfg.eigensolver)
    res.backward_error = float(backward_errors(op, res.dec).max())
    if spec.symmetric:
        res.symmetry = symmetry_diagnostic(res.dec, op, spec, s_tol=cfg.s_tol)
    try:
        res.dec = with_zero_mode(res.dec, cfg.tol_zero)
        fc = fourier_coefficients(res.dec, spec, op.mesh, cfg.quadrature)
        try:
            res.series = truncated_coefficients(res.dec, fc.eta, fc.omega, rel_tol=cfg.rel_tol,
                                                tol_zero=cfg.tol_zero)
        except NoConvergence:
            # keep the partial sums up to n_max for the report
            res.series = truncated_coefficients(res.dec, fc.eta, fc.omega, tol_zero=cfg.tol_zero)
            raise
    except (TunnellingCollapse, NoConvergence) as exc:
        res.status = type(exc).__name__
        res.error = exc
        log.warning("%s at %s", res.status, _label(cfg))
    return res


def _label(cfg: RunConfig) -> str:
    return f"case={cfg.case} gamma={cfg.gamma:g} theta={cfg.theta:g} delta={cfg.delta}"
