"""Operator assembly: checkerboard coefficients, interior-edge DOF mapping,
and the level-k stiffness-plus-mass matrix with tangential boundary
conditions imposed by elimination."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import element
from .errors import InvalidCoefficientError, InvalidEntityError
from .lattice import EDGE_KINDS, EntityKey, LatticeMesh, _lex_order


@dataclass(frozen=True)
class CoefficientField:
    """Piecewise-constant coefficients, one (alpha, beta) pair per color of
    the initial subdomains.  The subdomain at initial-lattice position
    (i, j, k) is black iff i + j + k is even; every refined cell inherits
    the color of the subdomain containing it."""

    alpha_black: float
    beta_black: float
    alpha_white: float = 1.0
    beta_white: float = 1.0

    def __post_init__(self):
        if self.beta_black <= 0 or self.beta_white <= 0:
            raise InvalidCoefficientError("beta must be strictly positive")
        if self.alpha_black < 0 or self.alpha_white < 0:
            raise InvalidCoefficientError("alpha must be nonnegative")

    def is_black_subdomain(self, subdomain) -> bool:
        i, j, l = subdomain
        return (i + j + l) % 2 == 0

    def cell_values(self, cells: np.ndarray, level: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-cell (alpha, beta) arrays for cells at the given level."""
        sub = np.asarray(cells) >> level
        black = (sub.sum(axis=1) % 2) == 0
        alpha = np.where(black, self.alpha_black, self.alpha_white)
        beta = np.where(black, self.beta_black, self.beta_white)
        return alpha, beta

    def label(self) -> str:
        return (
            f"ab={self.alpha_black:g} bb={self.beta_black:g} "
            f"aw={self.alpha_white:g} bw={self.beta_white:g}"
        )


class DofMap:
    """Bijection between interior (non-boundary) edges of a mesh and unknown
    indices.  Ordering is deterministic: x-edges, then y-, then z-edges,
    each block sorted lexicographically by (z, y, x) anchor."""

    def __init__(self, mesh: LatticeMesh):
        self.mesh = mesh
        self.level = mesh.level
        grids = []
        offset = 0
        self._block_coords = []
        for d in range(3):
            interior = mesh.edge_interior(d)
            coords = np.argwhere(interior)
            coords = coords[_lex_order(coords)]
            grid = np.full(interior.shape, -1, dtype=np.int64)
            grid[coords[:, 0], coords[:, 1], coords[:, 2]] = offset + np.arange(len(coords))
            offset += len(coords)
            grids.append(grid)
            self._block_coords.append(coords)
        self.index_grids = grids
        self.n = offset

    def edge_indices(self, d: int, anchors: np.ndarray) -> np.ndarray:
        """DOF indices (or -1) for edge anchors of direction d, any shape (..., 3)."""
        anchors = np.asarray(anchors)
        return self.index_grids[d][anchors[..., 0], anchors[..., 1], anchors[..., 2]]

    def index_of(self, key: EntityKey) -> int:
        if key.kind not in EDGE_KINDS:
            raise InvalidEntityError(f"{key} is not an edge")
        d = EDGE_KINDS.index(key.kind)
        grid = self.index_grids[d]
        i, j, l = key.coords
        if not all(0 <= c < s for c, s in zip(key.coords, grid.shape)):
            raise InvalidEntityError(f"{key} is outside the mesh lattice")
        idx = int(grid[i, j, l])
        if idx < 0:
            raise InvalidEntityError(f"{key} is not an interior edge")
        return idx

    @cached_property
    def keys(self) -> list[EntityKey]:
        out = []
        for d in range(3):
            kind = EDGE_KINDS[d]
            out += [EntityKey(kind, tuple(int(c) for c in a)) for a in self._block_coords[d]]
        return out


@dataclass
class AssembledOperator:
    """Symmetric sparse level operator together with its coefficient field."""

    matrix: sp.csr_matrix
    coeffs: CoefficientField
    level: int

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def cell_dof_indices(mesh: LatticeMesh, dofs: DofMap, cells: np.ndarray | None = None) -> np.ndarray:
    """DOF indices (or -1) of the 12 local edges of each cell, shape (C, 12)."""
    if cells is None:
        cells = mesh.cells()
    C = len(cells)
    out = np.empty((C, 12), dtype=np.int64)
    for e, (d, o1, o2) in enumerate(element.LOCAL_EDGES):
        t1, t2 = element.TRANSVERSE[d]
        anchors = cells.copy()
        anchors[:, t1] += o1
        anchors[:, t2] += o2
        out[:, e] = dofs.edge_indices(d, anchors)
    return out


def assemble(mesh: LatticeMesh, coeffs: CoefficientField) -> tuple[AssembledOperator, DofMap]:
    """Assemble A = sum_cells (alpha_c K + beta_c M) over interior-edge DOFs."""
    dofs = DofMap(mesh)
    cells = mesh.cells()
    em = element.local_matrices(mesh.h)
    alpha, beta = coeffs.cell_values(cells, mesh.level)
    dof = cell_dof_indices(mesh, dofs, cells)

    data = alpha[:, None, None] * em.K + beta[:, None, None] * em.M
    rows = np.broadcast_to(dof[:, :, None], data.shape)
    cols = np.broadcast_to(dof[:, None, :], data.shape)
    valid = (rows >= 0) & (cols >= 0)
    A = sp.coo_matrix(
        (data[valid], (rows[valid], cols[valid])), shape=(dofs.n, dofs.n)
    ).tocsr()
    A.sum_duplicates()
    return AssembledOperator(matrix=A, coeffs=coeffs, level=mesh.level), dofs


def assemble_rhs(mesh: LatticeMesh, dofs: DofMap, f) -> np.ndarray:
    """Load vector <f, N_i> over free DOFs by 2-point Gauss quadrature.

    `f` maps a physical point (3,) to a 3-vector; it may also accept an
    (N, 3) array and return (N, 3).
    """
    cells = mesh.cells()
    if len(cells) == 0:
        return np.zeros(dofs.n)
    pts, w = element.gauss_points(2)
    vals = element.basis_values(pts)  # (8, 12, 3)
    dof = cell_dof_indices(mesh, dofs, cells)
    h = mesh.h

    contrib = np.zeros((len(cells), 12))
    for q in range(len(w)):
        phys = -1.0 + (cells + pts[q]) * h
        F = _eval_field(f, phys)
        contrib += (h**3 * w[q]) * (F @ vals[q].T)

    rhs = np.zeros(dofs.n)
    valid = dof >= 0
    np.add.at(rhs, dof[valid], contrib[valid])
    return rhs


def _eval_field(f, points: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(points), dtype=float)
        if out.shape == points.shape:
            return out
    except Exception:
        pass
    return np.array([f(p) for p in points], dtype=float)
