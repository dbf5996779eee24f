"""Velocity potentials, Maxwellian equilibria and the Schrödinger potential.

All potentials handled here have the form

    W(v) = a4 v^4 + a3 |v|^3 + a2 v^2 + a1 v

together with an effective diffusivity ``vartheta``.  The rescaled swarming
family (cases A, B, C) and the quadratic reference potential are both
instances of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter, NonNormalizable
from .quadrature import composite_gauss

# Maxwellian at +-R relative to its peak must fall below this
TAIL_TOLERANCE = 1e-10
SYMMETRIC_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class PotentialSpec:
    """Immutable description of a velocity potential and its equilibrium.

    The normalization ``Z`` and the equilibrium mean velocity ``V`` are
    computed once at construction by composite Gauss-Legendre quadrature
    over [-R, R].  ``Z`` may overflow for deep wells; ``log_Z`` is always
    finite.
    """

    a4: float
    a3: float
    a2: float
    a1: float
    vartheta: float
    R: float = 10.0
    gamma: float | None = None
    theta: float | None = None
    delta: float | None = None
    sigma: int | None = None
    quad_points: int = 32
    quad_panels: int = 200
    w_ref: float = field(init=False)
    log_norm: float = field(init=False)
    V: float = field(init=False)

    def __post_init__(self):
        if not (self.vartheta > 0 and math.isfinite(self.vartheta)):
            raise BadParameter(f"vartheta must be positive and finite, got {self.vartheta}")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise BadParameter(f"domain half-width must be positive, got {self.R}")
        if self.quad_points < 1 or self.quad_panels < 2 or self.quad_panels % 2:
            raise BadParameter("quadrature needs >= 1 point and an even panel count >= 2")
        x, w = composite_gauss(-self.R, self.R, self.quad_panels, self.quad_points, (0.0,))
        Wx = self.W(x)
        if not np.all(np.isfinite(Wx)):
            raise NonNormalizable("potential is not finite on the quadrature grid")
        w_ref = float(min(Wx.min(), self.W(0.0)))
        e = np.exp(-(Wx - w_ref) / self.vartheta)
        mass = float(np.dot(w, e))
        if not (mass > 0 and math.isfinite(mass)):
            raise NonNormalizable(f"integral of exp(-W/vartheta) is {mass}")
        tail = np.exp(-(self.W(np.array([-self.R, self.R])) - w_ref) / self.vartheta)
        if tail.max() > TAIL_TOLERANCE:
            raise BadParameter(
                f"Maxwellian does not decay on [-{self.R}, {self.R}] "
                f"(edge/peak ratio {tail.max():.3g}); enlarge R")
        object.__setattr__(self, "w_ref", w_ref)
        object.__setattr__(self, "log_norm", math.log(mass))
        # odd integrand on a mirror-symmetric rule: zero up to rounding, pinned exactly
        V = 0.0 if self.a1 == 0.0 else float(np.dot(w, x * e)) / mass
        object.__setattr__(self, "V", V)

    # potential and derivatives

    def W(self, v):
        v = np.asarray(v, dtype=float)
        return ((self.a4 * v + self.a3 * np.sign(v)) * v + self.a2) * v * v + self.a1 * v

    def dW(self, v):
        v = np.asarray(v, dtype=float)
        return 4 * self.a4 * v * v * v + 3 * self.a3 * v * np.abs(v) + 2 * self.a2 * v + self.a1

    def d2W(self, v):
        v = np.asarray(v, dtype=float)
        return 12 * self.a4 * v * v + 6 * self.a3 * np.abs(v) + 2 * self.a2

    def phi(self, v):
        """Schrödinger potential -W''/2 + W'^2 / (4 vartheta)."""
        return -0.5 * self.d2W(v) + self.dW(v) ** 2 / (4 * self.vartheta)

    # equilibrium

    @property
    def log_Z(self) -> float:
        return self.log_norm - self.w_ref / self.vartheta

    @property
    def Z(self) -> float:
        return math.exp(self.log_Z) if self.log_Z < 709 else math.inf

    def maxwellian(self, v):
        return np.exp(-(self.W(v) - self.w_ref) / self.vartheta - self.log_norm)

    def sqrt_maxwellian(self, v):
        return np.exp(-0.5 * ((self.W(v) - self.w_ref) / self.vartheta + self.log_norm))

    @property
    def symmetric(self) -> bool:
        return self.a1 == 0.0


def make_potential(gamma: float, theta: float = 1.0, delta: float = 0.0, sigma: int = 0,
                   domain_R: float = 10.0, quad_points: int = 32,
                   quad_panels: int = 200) -> PotentialSpec:
    """Rescaled swarming potential

        W(v) = v^4/4 - (sigma sqrt(gamma)/3)|v|^3 - ((1-sigma)/2) v^2 - (delta/sqrt(gamma)) v

    with diffusivity vartheta = theta / gamma.
    """
    if not (gamma > 0 and math.isfinite(gamma)):
        raise BadParameter(f"gamma must be positive, got {gamma}")
    if not (theta > 0 and math.isfinite(theta)):
        raise BadParameter(f"theta must be positive, got {theta}")
    if not (delta >= 0 and math.isfinite(delta)):
        raise BadParameter(f"delta must be nonnegative, got {delta}")
    if sigma not in (0, 1):
        raise BadParameter(f"sigma must be 0 or 1, got {sigma}")
    sg = math.sqrt(gamma)
    return PotentialSpec(
        a4=0.25,
        a3=-sigma * sg / 3.0,
        a2=-(1 - sigma) / 2.0,
        a1=-delta / sg,
        vartheta=theta / gamma,
        R=domain_R,
        gamma=float(gamma), theta=float(theta), delta=float(delta), sigma=int(sigma),
        quad_points=quad_points, quad_panels=quad_panels,
    )


def quadratic_potential(vartheta: float = 1.0, domain_R: float = 10.0) -> PotentialSpec:
    """W(v) = v^2/2, the exactly solvable reference."""
    return PotentialSpec(a4=0.0, a3=0.0, a2=0.5, a1=0.0, vartheta=vartheta, R=domain_R)


def case_potential(case: str, gamma: float, theta: float = 1.0, delta: float | None = None,
                   domain_R: float = 10.0) -> PotentialSpec:
    """Potential for one of the named cases 'A', 'B', 'C'."""
    case = case.upper()
    if case == "A":
        return make_potential(gamma, theta, 0.0 if delta is None else delta, 0, domain_R)
    if case == "B":
        return make_potential(gamma, theta, 0.0 if delta is None else delta, 1, domain_R)
    if case == "C":
        d = 1.0 if delta is None else delta
        if d <= 0:
            raise BadParameter("case C needs a positive tilt delta")
        return make_potential(gamma, theta, d, 0, domain_R)
    raise BadParameter(f"unknown case {case!r}")


def eval_W(spec: PotentialSpec, v):
    """Return (W, W', W'') at ``v``."""
    return spec.W(v), spec.dW(v), spec.d2W(v)


def schrodinger_potential(spec: PotentialSpec, v):
    return spec.phi(v)


def maxwellian_sqrt(spec: PotentialSpec, v):
    return spec.sqrt_maxwellian(v)
