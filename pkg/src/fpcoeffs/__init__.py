"""Spectral computation of drift and diffusion coefficients for kinetic Fokker-Planck models.

The velocity cell problems of the diffusion limit are mapped to the 1D
Schrödinger operator -vartheta u'' + Phi(v) u, whose lowest eigenpairs are
computed with high-order finite elements.  The coefficients follow as

    D = sum_k eta_k^2 / lambda_k,     K = sum_k eta_k omega_k / lambda_k,

with the zero mode excluded.
"""

from __future__ import annotations

from .coefficients import (CoefficientSeries, FourierCoefficients, auto_truncate,
                           fourier_coefficients, project, rhs_samples, truncated_coefficients)
from .config import RunConfig, load_config
from .discretize import (DiscreteOperator, Mesh, assemble, assemble_fd, build_mesh,
                         dump_triplets, load_triplets)
from .eigensolve import (SpectralDecomposition, SymmetryDiagnostic, backward_errors,
                         identify_zero_mode,
                         lowest_eigenpairs, parity_scores, symmetry_diagnostic, with_zero_mode)
from .errors import (AssemblyFailure, BadParameter, DivisionHazard, FactorizationFailure,
                     FPCoeffsError, IoFailure, MeshMismatch, NoConvergence,
                     NonConvergentQuadrature, NonNormalizable, TunnellingCollapse)
from .oracle import OracleResult, drift_oracle, quadratic_reference
from .pipeline import PointResult, compute_point
from .potential import (PotentialSpec, case_potential, eval_W, make_potential,
                        maxwellian_sqrt, quadratic_potential, schrodinger_potential)

__version__ = "0.1.0"
