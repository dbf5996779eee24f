from __future__ import annotations

import numpy as np
import pytest

from fpcoeffs import (assemble, build_mesh, case_potential, lowest_eigenpairs,
                      quadratic_potential, with_zero_mode)


@pytest.fixture(scope="session")
def quad_setup():
    """Quadratic reference W = v^2/2, vartheta = 1, on 200 elements of degree 4."""
    spec = quadratic_potential(1.0)
    mesh = build_mesh(10.0, 200, 4, 21)
    op = assemble(mesh, spec)
    dec = with_zero_mode(lowest_eigenpairs(op, 8, method="dense"))
    return spec, mesh, op, dec


@pytest.fixture(scope="session")
def case_a_small():
    """Case A, gamma = 1, on 200 elements of degree 10 (dense solver)."""
    spec = case_potential("A", 1.0)
    mesh = build_mesh(10.0, 200, 10, 21)
    op = assemble(mesh, spec)
    dec = with_zero_mode(lowest_eigenpairs(op, 51))
    return spec, mesh, op, dec


@pytest.fixture(scope="session")
def case_a_full():
    """Case A, gamma = 1, on the full 1000 x P10 mesh (Lanczos)."""
    spec = case_potential("A", 1.0)
    mesh = build_mesh()
    op = assemble(mesh, spec)
    dec = with_zero_mode(lowest_eigenpairs(op, 51))
    return spec, mesh, op, dec


def trapezoid(y, x):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))
