"""High-order finite elements for the 1D Schrödinger operator -vartheta u'' + Phi u.

The truncated domain [-R, R] is split into uniform elements carrying Lagrange
bases on Gauss-Lobatto points.  Homogeneous Dirichlet conditions are imposed by
dropping the two boundary degrees of freedom, which leaves the symmetric pencil
(A, B) of stiffness and mass matrices.  A second-order finite-difference
discretization with the same conventions is provided as a cross-check.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from numpy.polynomial import legendre

from .errors import AssemblyFailure, BadParameter, IoFailure
from .potential import PotentialSpec
from .quadrature import gauss_legendre, gauss_lobatto, points_for_exactness

SYMMETRY_RTOL = 1e-13


def lagrange_tables(ref_nodes: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the Lagrange basis on ``ref_nodes`` at points ``x``.

    Returns arrays of shape (len(x), len(ref_nodes)).
    """
    p = len(ref_nodes) - 1
    coef = np.linalg.inv(legendre.legvander(ref_nodes, p))
    vals = legendre.legvander(x, p) @ coef
    dcoef = legendre.legder(coef, axis=0)
    ders = legendre.legvander(x, p - 1) @ dcoef if p > 0 else np.zeros_like(vals)
    return vals, ders


@dataclass(frozen=True, eq=False)
class Mesh:
    R: float
    n_elements: int
    degree: int
    quad_degree: int
    edges: np.ndarray
    nodes: np.ndarray

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.n_elements

    @property
    def n_interior(self) -> int:
        return self.n_elements * self.degree - 1

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.nodes[1:-1]

    @cached_property
    def ref_nodes(self) -> np.ndarray:
        return gauss_lobatto(self.degree + 1)[0]

    @cached_property
    def ref_quadrature(self) -> tuple[np.ndarray, np.ndarray]:
        return gauss_legendre(points_for_exactness(self.quad_degree))

    @cached_property
    def quad_tables(self) -> tuple[np.ndarray, np.ndarray]:
        return lagrange_tables(self.ref_nodes, self.ref_quadrature[0])

    @cached_property
    def quad_points(self) -> np.ndarray:
        """Physical quadrature points, shape (n_elements, n_q)."""
        mid = 0.5 * (self.edges[1:] + self.edges[:-1])
        return mid[:, None] + 0.5 * self.h * self.ref_quadrature[0][None, :]

    @cached_property
    def quad_weights(self) -> np.ndarray:
        return 0.5 * self.h * self.ref_quadrature[1]

    @cached_property
    def connectivity(self) -> np.ndarray:
        """Global node index of each local node, shape (n_elements, degree + 1)."""
        p = self.degree
        return np.arange(self.n_elements)[:, None] * p + np.arange(p + 1)[None, :]

    def full_vector(self, x: np.ndarray) -> np.ndarray:
        """Pad an interior coefficient vector with the Dirichlet zeros."""
        out = np.zeros(len(self.nodes))
        out[1:-1] = x
        return out

    def mirror(self) -> np.ndarray:
        """Permutation of interior DOFs realizing v -> -v."""
        return np.arange(self.n_interior)[::-1]

    def evaluate(self, x: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Evaluate the finite-element function with interior coefficients ``x``."""
        u = self.full_vector(x)
        pts = np.asarray(points, dtype=float)
        e = np.clip(((pts + self.R) / self.h).astype(int), 0, self.n_elements - 1)
        xi = 2.0 * (pts - self.edges[e]) / self.h - 1.0
        out = np.empty_like(pts)
        for k in np.unique(e):
            sel = e == k
            vals, _ = lagrange_tables(self.ref_nodes, xi[sel])
            out[sel] = vals @ u[self.connectivity[k]]
        return out


def build_mesh(R: float = 10.0, n_elements: int = 1000, degree: int = 10,
               quad_degree: int = 21) -> Mesh:
    """Uniform mesh of [-R, R] with an element edge at 0 and Gauss-Lobatto nodes."""
    if not (R > 0 and np.isfinite(R)):
        raise BadParameter(f"R must be positive, got {R}")
    if n_elements < 2 or n_elements % 2:
        raise BadParameter(f"n_elements must be even and >= 2 (edge at v=0), got {n_elements}")
    if degree < 1:
        raise BadParameter(f"degree must be >= 1, got {degree}")
    if quad_degree < 2 * degree + 1:
        raise BadParameter(f"quad_degree must be >= 2*degree+1 = {2 * degree + 1}, got {quad_degree}")
    half = np.linspace(0.0, R, n_elements // 2 + 1)  # endpoint pinned to R exactly
    edges = np.concatenate([-half[::-1], half[1:]])
    xi = gauss_lobatto(degree + 1)[0]
    hh = R / n_elements
    mid = 0.5 * (edges[1:] + edges[:-1])
    inner = mid[:, None] + hh * xi[None, 1:-1]
    nodes = np.concatenate([np.column_stack([edges[:-1], inner]).ravel(), edges[-1:]])
    return Mesh(R=float(R), n_elements=int(n_elements), degree=int(degree),
                quad_degree=int(quad_degree), edges=edges, nodes=nodes)


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Stiffness ``A`` and mass ``B`` on the interior DOFs, as CSR matrices."""

    A: sp.csr_matrix
    B: sp.csr_matrix
    bandwidth: int
    mesh: Mesh
    kind: str = "fem"

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def banded(self, which: str = "A") -> np.ndarray:
        """Upper banded storage as used by LAPACK (``scipy.linalg.*_banded``)."""
        M = self.A if which == "A" else self.B
        u = (self.bandwidth - 1) // 2
        ab = np.zeros((u + 1, self.n))
        for k in range(u + 1):
            d = M.diagonal(k)
            ab[u - k, k:] = d
        return ab


def _assemble_global(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    conn = mesh.connectivity
    q = conn.shape[1]
    rows = np.repeat(conn, q, axis=1).ravel()
    cols = np.tile(conn, (1, q)).ravel()
    N = len(mesh.nodes)
    G = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(N, N)).tocsr()
    return G[1:-1, 1:-1].tocsr()


def _symmetrize(M: sp.csr_matrix, name: str) -> sp.csr_matrix:
    scale = abs(M).max()
    asym = abs(M - M.T).max()
    if not scale > 0 or asym > SYMMETRY_RTOL * scale:
        raise AssemblyFailure(f"{name} is not symmetric (relative deviation {asym / scale:.3g})")
    S = ((M + M.T) * 0.5).tocsr()
    S.sort_indices()
    return S


def assemble(mesh: Mesh, spec: PotentialSpec) -> DiscreteOperator:
    """Assemble A_ij = int vartheta phi_i' phi_j' + Phi phi_i phi_j and B_ij = int phi_i phi_j."""
    if abs(mesh.R - spec.R) > 1e-12 * spec.R:
        raise BadParameter(f"mesh half-width {mesh.R} differs from potential domain {spec.R}")
    L, dL = mesh.quad_tables
    w = mesh.ref_quadrature[1]
    h = mesh.h
    phi = spec.phi(mesh.quad_points)
    if not np.all(np.isfinite(phi)):
        raise AssemblyFailure("Schrödinger potential is not finite at a quadrature point")
    stiff = (2.0 / h) * spec.vartheta * (dL.T * w) @ dL
    mass = 0.5 * h * (L.T * w) @ L
    pot = 0.5 * h * np.einsum("qi,eq,qj->eij", L, phi * w, L, optimize=True)
    A = _assemble_global(mesh, pot + stiff[None])
    B = _assemble_global(mesh, np.broadcast_to(mass, pot.shape))
    return DiscreteOperator(A=_symmetrize(A, "A"), B=_symmetrize(B, "B"),
                            bandwidth=2 * mesh.degree + 1, mesh=mesh)


def assemble_fd(R: float, n_points: int, spec: PotentialSpec) -> DiscreteOperator:
    """Central differences on a uniform grid of ``n_points`` (odd) points.

    B is h times the identity so eigenvalues and B-normalized vectors follow
    the same conventions as the finite-element pencil.
    """
    if n_points < 3 or n_points % 2 == 0:
        raise BadParameter(f"n_points must be odd and >= 3, got {n_points}")
    mesh = build_mesh(R, n_points - 1, 1, 3)
    if abs(mesh.R - spec.R) > 1e-12 * spec.R:
        raise BadParameter(f"grid half-width {R} differs from potential domain {spec.R}")
    x = mesh.interior_nodes
    h = mesh.h
    phi = spec.phi(x)
    if not np.all(np.isfinite(phi)):
        raise AssemblyFailure("Schrödinger potential is not finite on the grid")
    n = len(x)
    off = np.full(n - 1, -spec.vartheta / h)
    A = sp.diags([off, 2 * spec.vartheta / h + h * phi, off], [-1, 0, 1], format="csr")
    B = sp.identity(n, format="csr") * h
    return DiscreteOperator(A=_symmetrize(A, "A"), B=_symmetrize(B.tocsr(), "B"),
                            bandwidth=3, mesh=mesh, kind="fd")


def dump_triplets(op: DiscreteOperator, directory: str | os.PathLike) -> tuple[str, str]:
    """Write A and B as ``row col value`` lines (0-based, 17 significant digits)."""
    paths = []
    try:
        os.makedirs(directory, exist_ok=True)
        for name, M in (("A", op.A), ("B", op.B)):
            C = M.tocoo()
            order = np.lexsort((C.col, C.row))
            path = os.path.join(directory, f"{name}.txt")
            tmp = path + ".tmp"
            with open(tmp, "w", newline="\n") as fh:
                for i, j, v in zip(C.row[order], C.col[order], C.data[order]):
                    fh.write(f"{i} {j} {v:.17g}\n")
            os.replace(tmp, path)
            paths.append(path)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return paths[0], paths[1]


def load_triplets(path: str | os.PathLike, n: int) -> sp.csr_matrix:
    data = np.loadtxt(path, ndmin=2)
    return sp.coo_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))),
                         shape=(n, n)).tocsr()
