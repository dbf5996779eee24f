"""Gauss-Legendre and Gauss-Lobatto rules on [-1, 1] and composite rules on intervals."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights of the n-point Gauss-Legendre rule (exact to degree 2n-1)."""
    x, w = legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def points_for_exactness(degree: int) -> int:
    """Smallest Gauss-Legendre point count integrating polynomials of ``degree`` exactly."""
    return max(1, (degree + 2) // 2)


@lru_cache(maxsize=None)
def gauss_lobatto(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights of the n-point Gauss-Lobatto rule, n >= 2.

    Interior points are the roots of P'_{n-1}, polished by Newton iteration.
    """
    if n < 2:
        raise ValueError("Gauss-Lobatto needs at least two points")
    p = n - 1
    x = np.empty(n)
    x[0], x[-1] = -1.0, 1.0
    if n > 2:
        dP = legendre.Legendre.basis(p).deriv()
        d2P = dP.deriv()
        r = np.sort(dP.roots().real)
        for _ in range(3):
            r = r - dP(r) / d2P(r)
        # symmetric layout, exact zero in the middle for odd n
        r = 0.5 * (r - r[::-1])
        x[1:-1] = r
    Pp = legendre.Legendre.basis(p)(x)
    w = 2.0 / (p * (p + 1) * Pp**2)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gauss(a: float, b: float, panels: int, points: int,
                    breakpoints: tuple[float, ...] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on [a, b].

    ``panels`` uniform panels are used; any ``breakpoints`` inside (a, b) that do
    not already coincide with a panel edge are inserted as extra edges so no panel
    straddles them.
    """
    edges = np.linspace(a, b, panels + 1)
    extra = [c for c in breakpoints if a < c < b and np.min(np.abs(edges - c)) > 1e-14 * (b - a)]
    if extra:
        edges = np.sort(np.concatenate([edges, extra]))
    else:
        # pin edges that should sit on a breakpoint exactly
        for c in breakpoints:
            if a < c < b:
                edges[np.argmin(np.abs(edges - c))] = c
    xi, wi = gauss_legendre(points)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    w = (half[:, None] * wi[None, :]).ravel()
    return x, w
