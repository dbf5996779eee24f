"""Run configuration: defaults, flat YAML loading and validation."""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, fields, replace

import yaml

from .coefficients import DEFAULT_RULE, RULES
from .discretize import build_mesh
from .eigensolve import S_TOL, TOL_ZERO
from .errors import BadParameter, IoFailure
from .oracle import ORACLE_RTOL
from .potential import PotentialSpec, case_potential, make_potential, quadratic_potential

CASES = ("A", "B", "C", "quadratic")
FORMATS = ("csv", "svg")
SWEEP_PARAMS = ("gamma", "theta", "delta")
SOLVERS = ("auto", "dense", "lanczos")


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs.  A config holding only ``case`` is valid.

    ``case`` is one of A, B, C (named parameter families), ``quadratic``
    (W = v^2/2 with vartheta = theta) or ``None``, in which case gamma, theta,
    delta and sigma are used as given.
    """

    case: str | None = "A"
    gamma: float = 1.0
    theta: float = 1.0
    delta: float | None = None
    sigma: int = 0
    # sweep over one parameter
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] = ()
    # mesh
    R: float = 10.0
    n_elements: int = 1000
    degree: int = 10
    quad_degree: int = 21
    # modes
    n_max: int = 50
    rel_tol: float = 1e-8
    quadrature: str = DEFAULT_RULE
    eigensolver: str = "auto"
    # outputs
    output_dir: str = "fpcoeffs_out"
    formats: tuple[str, ...] = ("csv",)
    write_vectors: bool = True
    # tolerances
    tol_zero: float = TOL_ZERO
    s_tol: float = S_TOL
    oracle_rtol: float = ORACLE_RTOL
    drift_tol: float = 1e-4
    workers: int = 1

    def __post_init__(self):
        if self.case is not None and self.case not in CASES:
            if isinstance(self.case, str) and self.case.upper() in CASES:
                object.__setattr__(self, "case", self.case.upper())
            else:
                raise BadParameter(f"unknown case {self.case!r}; expected one of {CASES}")
        object.__setattr__(self, "formats", tuple(self.formats))
        try:
            object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        except (TypeError, ValueError) as exc:
            raise BadParameter(f"sweep values must be numbers: {exc}") from exc
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise BadParameter(f"unknown output format(s) {sorted(bad)}; expected a subset of {FORMATS}")
        if self.quadrature not in RULES:
            raise BadParameter(f"unknown quadrature rule {self.quadrature!r}")
        if self.eigensolver not in SOLVERS:
            raise BadParameter(f"unknown eigensolver {self.eigensolver!r}")
        if self.sweep_param is not None and self.sweep_param not in SWEEP_PARAMS:
            raise BadParameter(f"cannot sweep {self.sweep_param!r}; expected one of {SWEEP_PARAMS}")
        if not all(math.isfinite(v) for v in self.sweep_values):
            raise BadParameter("sweep values must be finite")
        if int(self.n_max) < 3:
            raise BadParameter(f"n_max must be >= 3, got {self.n_max}")
        for name in ("rel_tol", "tol_zero", "s_tol", "oracle_rtol", "drift_tol"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise BadParameter(f"{name} must be positive, got {v}")
        if int(self.workers) < 1:
            raise BadParameter(f"workers must be >= 1, got {self.workers}")

    def potential(self) -> PotentialSpec:
        if self.case == "quadratic":
            return quadratic_potential(self.theta, self.R)
        if self.case is None:
            return make_potential(self.gamma, self.theta, self.delta or 0.0, self.sigma, self.R)
        return case_potential(self.case, self.gamma, self.theta, self.delta, self.R)

    def mesh(self):
        return build_mesh(self.R, self.n_elements, self.degree, self.quad_degree)

    def points(self) -> list["RunConfig"]:
        """One config per sweep value, sweep cleared."""
        if self.sweep_param is None:
            raise BadParameter("no sweep parameter given")
        if not self.sweep_values:
            raise BadParameter("sweep list is empty")
        return [replace(self, **{self.sweep_param: v}, sweep_param=None, sweep_values=())
                for v in self.sweep_values]

    def validate(self) -> None:
        """Check that potentials and the mesh can be built for every point."""
        self.mesh()
        for cfg in (self.points() if self.sweep_param is not None else [self]):
            cfg.potential()

    def as_dict(self) -> dict:
        d = asdict(self)
        d["formats"] = list(self.formats)
        d["sweep_values"] = list(self.sweep_values)
        return d


FIELD_NAMES = tuple(f.name for f in fields(RunConfig))


def config_from_mapping(data: dict) -> RunConfig:
    """Build a config from a flat mapping; unknown keys are rejected."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise BadParameter("config document must be a mapping of key: value pairs")
    unknown = set(data) - set(FIELD_NAMES)
    if unknown:
        raise BadParameter(f"unknown config keys: {sorted(unknown)}")
    data = dict(data)
    for key in ("formats", "sweep_values"):
        if isinstance(data.get(key), str):
            data[key] = [s for s in data[key].replace(",", " ").split() if s]
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise BadParameter(str(exc)) from exc


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise BadParameter(f"config {path} is not valid YAML: {exc}") from exc
    return config_from_mapping(data)
