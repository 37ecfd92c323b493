"""Intergrid transfer: natural injection of the coarse edge-element space
into the fine one, and its transpose as restriction.

The column of a coarse edge basis function holds its average tangential
components on same-direction fine edges: 1 on the two fine edges lying on
the coarse edge, 1/2 on fine edges mid-face of the adjacent coarse faces,
and 1/4 on fine edges through the centers of the adjacent coarse cells
(the coarse shape function evaluated at transverse offsets 0, 1/2).  Fine
edges on the domain boundary are eliminated DOFs and simply drop out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .assembly import DofMap
from .errors import DimensionMismatchError, MeshConsistencyError
from .lattice import TRANSVERSE_AXES

_TRANSVERSE_WEIGHT = {-1: 0.5, 0: 1.0, 1: 0.5}


@dataclass
class TransferOperator:
    """Sparse coarse-to-fine interpolation P of shape (n_fine, n_coarse)."""

    matrix: sp.csr_matrix
    coarse_level: int
    fine_level: int


def build_transfer(coarse: DofMap, fine: DofMap) -> TransferOperator:
    if fine.level != coarse.level + 1:
        raise MeshConsistencyError("transfer requires an adjacent level pair")
    if not np.array_equal(fine.mesh.coarsen().cell_grid, coarse.mesh.cell_grid):
        raise MeshConsistencyError("fine mesh is not the refinement of the coarse mesh")

    rows, cols, vals = [], [], []
    for d in range(3):
        t1, t2 = TRANSVERSE_AXES[d]
        coords = coarse._block_coords[d]
        if len(coords) == 0:
            continue
        col = coarse.edge_indices(d, coords)
        shape = fine.index_grids[d].shape
        for t in (0, 1):
            for dj in (-1, 0, 1):
                for dl in (-1, 0, 1):
                    anchors = 2 * coords
                    anchors[:, d] += t
                    anchors[:, t1] += dj
                    anchors[:, t2] += dl
                    inside = np.all((anchors >= 0) & (anchors < shape), axis=1)
                    if not inside.any():
                        continue
                    row = fine.edge_indices(d, anchors[inside])
                    free = row >= 0
                    rows.append(row[free])
                    cols.append(col[inside][free])
                    w = _TRANSVERSE_WEIGHT[dj] * _TRANSVERSE_WEIGHT[dl]
                    vals.append(np.full(free.sum(), w))

    P = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(fine.n, coarse.n),
    ).tocsr()
    return TransferOperator(matrix=P, coarse_level=coarse.level, fine_level=fine.level)


def prolongate(P: TransferOperator, x_coarse: np.ndarray) -> np.ndarray:
    if x_coarse.shape[0] != P.matrix.shape[1]:
        raise DimensionMismatchError(f"prolongate: {P.matrix.shape} @ {x_coarse.shape}")
    return P.matrix @ x_coarse


def restrict(P: TransferOperator, r_fine: np.ndarray) -> np.ndarray:
    if r_fine.shape[0] != P.matrix.shape[0]:
        raise DimensionMismatchError(f"restrict: {P.matrix.shape}^T @ {r_fine.shape}")
    return P.matrix.T @ r_fine
