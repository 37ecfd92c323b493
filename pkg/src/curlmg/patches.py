"""Nonoverlapping substructuring subspaces on one level pair.

Three patch families are induced by the coarse mesh: the 6-DOF interiors
of coarse cells, and the skeleton spaces attached to interior coarse edges
and interior coarse vertices.  A skeleton space is spanned by basis
functions that take unit value on one skeleton DOF and extend
energy-harmonically into the adjacent cell interiors, which makes them
a-orthogonal to the interior spaces by construction.  Its local operator
is therefore the Schur complement

    S = A_GG - A_GI A_II^-1 A_IG,      H = -A_II^-1 A_IG,

over the skeleton (G) and interior-extension (I) index sets, which are
extracted as principal submatrices of the assembled level operator.

Skeleton DOF layout (fixed, shared with the batched fast path):

  edge patch (direction d at coarse (I,J,L)), |G| = 18, |I| = 24:
    G[0:2]   the 2 fine edges on the coarse edge
    G[2:18]  4 interior fine edges of each adjacent coarse face, faces
             ordered (normal t1, offset -1), (t1, 0), (t2, -1), (t2, 0)
    I        interiors of the 4 adjacent cells, transverse offsets
             (-1,-1), (-1,0), (0,-1), (0,0), 6 DOFs each

  vertex patch at coarse (I,J,L), |G| = 60, |I| = 48:
    G[0:12]  2 fine edges on each of the 6 coarse edges at P
             (direction-major, offset -1 then 0)
    G[12:60] 4 interior fine edges of each of the 12 coarse faces at P
             (normal-major, transverse offsets (-1,-1), (-1,0), (0,-1), (0,0))
    I        interiors of the 8 adjacent cells, offsets lexicographic in
             {-1,0}^3 (x fastest), 6 DOFs each

Cell-interior DOF order everywhere: direction-major, anchor offset 0 then 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .assembly import AssembledOperator, DofMap
from .errors import MeshConsistencyError, NotSPDError
from .lattice import EDGE_KINDS, TRANSVERSE_AXES, EntityKey, EntityKind, LatticeMesh
from .linalg import DenseSymFactor

_GATHER_CHUNK_ENTRIES = 8_000_000


@dataclass
class InteriorPatch:
    """Interior of one coarse cell: the 6 fine edges strictly inside it."""

    key: EntityKey
    dofs: np.ndarray
    matrix: np.ndarray

    @cached_property
    def factor(self) -> DenseSymFactor:
        return DenseSymFactor(self.matrix)


@dataclass
class SkeletonPatch:
    """Skeleton subspace with cached harmonic extension and Schur factor."""

    key: EntityKey
    skeleton_dofs: np.ndarray
    interior_dofs: np.ndarray
    extension: np.ndarray  # H, shape (|I|, |G|)
    schur: np.ndarray      # S, shape (|G|, |G|)

    @cached_property
    def factor(self) -> DenseSymFactor:
        return DenseSymFactor(self.schur)

    def basis_vector(self, i: int, n: int) -> np.ndarray:
        """Global coefficient vector of the i-th harmonic basis function."""
        v = np.zeros(n)
        v[self.skeleton_dofs[i]] = 1.0
        v[self.interior_dofs] = self.extension[:, i]
        return v


class EdgePatch(SkeletonPatch):
    pass


class VertexPatch(SkeletonPatch):
    pass


def patch_correct(patch, r: np.ndarray) -> np.ndarray:
    """Global correction J A_loc^-1 J^t r of a single patch (zero outside)."""
    out = np.zeros_like(r)
    if isinstance(patch, InteriorPatch):
        out[patch.dofs] = patch.factor.solve(r[patch.dofs])
        return out
    rho = r[patch.skeleton_dofs] + patch.extension.T @ r[patch.interior_dofs]
    c = patch.factor.solve(rho)
    out[patch.skeleton_dofs] = c
    out[patch.interior_dofs] = patch.extension @ c
    return out


# -- vectorized index-set construction ---------------------------------


def _cell_interior_indices(dofs: DofMap, cells: np.ndarray) -> np.ndarray:
    """DOF indices of the 6 interior fine edges of each coarse cell, (C, 6)."""
    out = np.empty((len(cells), 6), dtype=np.int64)
    f = 2 * cells
    for d in range(3):
        t1, t2 = TRANSVERSE_AXES[d]
        for t in (0, 1):
            a = f.copy()
            a[:, d] += t
            a[:, t1] += 1
            a[:, t2] += 1
            out[:, 2 * d + t] = dofs.edge_indices(d, a)
    return out


def _face_cross_indices(dofs: DofMap, d_normal: int, faces: np.ndarray) -> np.ndarray:
    """DOF indices of the 4 interior fine edges of each coarse face, (F, 4)."""
    t1, t2 = TRANSVERSE_AXES[d_normal]
    out = np.empty((len(faces), 4), dtype=np.int64)
    f = 2 * faces
    col = 0
    for td, to in ((t1, t2), (t2, t1)):
        for t in (0, 1):
            a = f.copy()
            a[:, td] += t
            a[:, to] += 1
            out[:, col] = dofs.edge_indices(td, a)
            col += 1
    return out


def _edge_on_indices(dofs: DofMap, d: int, edges: np.ndarray) -> np.ndarray:
    """DOF indices of the 2 fine edges on each coarse edge, (E, 2)."""
    out = np.empty((len(edges), 2), dtype=np.int64)
    f = 2 * edges
    for t in (0, 1):
        a = f.copy()
        a[:, d] += t
        out[:, t] = dofs.edge_indices(d, a)
    return out


def _edge_patch_indices(dofs: DofMap, d: int, edges: np.ndarray):
    """Skeleton (E, 18) and interior (E, 24) DOF indices of edge patches."""
    t1, t2 = TRANSVERSE_AXES[d]
    skel = [_edge_on_indices(dofs, d, edges)]
    for normal, off_axis in ((t1, t2), (t2, t1)):
        for off in (-1, 0):
            f = edges.copy()
            f[:, off_axis] += off
            skel.append(_face_cross_indices(dofs, normal, f))
    skel = np.hstack(skel)
    inter = []
    for o1 in (-1, 0):
        for o2 in (-1, 0):
            c = edges.copy()
            c[:, t1] += o1
            c[:, t2] += o2
            inter.append(_cell_interior_indices(dofs, c))
    return skel, np.hstack(inter)


def _vertex_patch_indices(dofs: DofMap, verts: np.ndarray):
    """Skeleton (V, 60) and interior (V, 48) DOF indices of vertex patches."""
    skel = []
    for d in range(3):
        for off in (-1, 0):
            e = verts.copy()
            e[:, d] += off
            skel.append(_edge_on_indices(dofs, d, e))
    for d in range(3):
        t1, t2 = TRANSVERSE_AXES[d]
        for o1 in (-1, 0):
            for o2 in (-1, 0):
                f = verts.copy()
                f[:, t1] += o1
                f[:, t2] += o2
                skel.append(_face_cross_indices(dofs, d, f))
    skel = np.hstack(skel)
    inter = []
    for o3 in (-1, 0):
        for o2 in (-1, 0):
            for o1 in (-1, 0):
                c = verts.copy()
                c[:, 0] += o1
                c[:, 1] += o2
                c[:, 2] += o3
                inter.append(_cell_interior_indices(dofs, c))
    return skel, np.hstack(inter)


# -- batched extraction and condensation --------------------------------


def _gather_submatrices(A: sp.csr_matrix, idx: np.ndarray) -> np.ndarray:
    """Principal submatrices A[idx_p, idx_p] for each row p of idx, (P, w, w)."""
    P, w = idx.shape
    out = np.empty((P, w, w))
    chunk = max(1, _GATHER_CHUNK_ENTRIES // (w * w))
    for lo in range(0, P, chunk):
        hi = min(P, lo + chunk)
        block = idx[lo:hi]
        rows = np.repeat(block, w, axis=1).reshape(-1)
        cols = np.tile(block, (1, w)).reshape(-1)
        out[lo:hi] = np.asarray(A[rows, cols]).reshape(hi - lo, w, w)
    return out


def _condense(A: sp.csr_matrix, skel: np.ndarray, inter: np.ndarray):
    """Batched harmonic extension H and Schur complement S per patch."""
    s = skel.shape[1]
    sub = _gather_submatrices(A, np.hstack([skel, inter]))
    AGG = sub[:, :s, :s]
    AGI = sub[:, :s, s:]
    AIG = sub[:, s:, :s]
    AII = sub[:, s:, s:]
    try:
        X = np.linalg.solve(AII, AIG)
    except np.linalg.LinAlgError as err:
        raise NotSPDError(f"singular patch interior block: {err}") from err
    H = -X
    S = AGG - AGI @ X
    return H, S


def _check_spd_batch(S: np.ndarray) -> None:
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError as err:
        raise NotSPDError(f"patch operator not SPD: {err}") from err


def _coarse_mesh(dofs: DofMap) -> LatticeMesh:
    return dofs.mesh.coarsen()


def _require_level(level: int, dofs: DofMap) -> None:
    if level != dofs.level:
        raise MeshConsistencyError(f"level {level} does not match DofMap level {dofs.level}")
    if level < 1:
        raise MeshConsistencyError("patches need a coarse level below them (level >= 1)")


def _require_free(idx: np.ndarray, what: str) -> None:
    if (idx < 0).any():
        raise MeshConsistencyError(
            f"{what} touches a boundary or absent fine edge; "
            "interior coarse entities must yield free DOFs only"
        )


def build_interior_patches(
    level: int, A: AssembledOperator, dofs: DofMap
) -> list[InteriorPatch]:
    _require_level(level, dofs)
    coarse = _coarse_mesh(dofs)
    cells = coarse.cells()
    idx = _cell_interior_indices(dofs, cells)
    _require_free(idx, "coarse cell interior")
    mats = _gather_submatrices(A.matrix, idx)
    _check_spd_batch(mats)
    return [
        InteriorPatch(
            key=EntityKey(EntityKind.CELL, tuple(int(c) for c in cells[p])),
            dofs=idx[p],
            matrix=mats[p],
        )
        for p in range(len(cells))
    ]


def _build_skeleton_patches(level, A, dofs, kind):
    _require_level(level, dofs)
    coarse = _coarse_mesh(dofs)
    patches = []
    if kind == "edge":
        for d in range(3):
            edges = coarse.edges(d, interior_only=True)
            if len(edges) == 0:
                continue
            skel, inter = _edge_patch_indices(dofs, d, edges)
            _require_free(skel, "edge patch skeleton")
            _require_free(inter, "edge patch interior")
            H, S = _condense(A.matrix, skel, inter)
            _check_spd_batch(S)
            patches += [
                EdgePatch(
                    key=EntityKey(EDGE_KINDS[d], tuple(int(c) for c in edges[p])),
                    skeleton_dofs=skel[p],
                    interior_dofs=inter[p],
                    extension=H[p],
                    schur=S[p],
                )
                for p in range(len(edges))
            ]
    else:
        verts = coarse.vertices(interior_only=True)
        if len(verts):
            skel, inter = _vertex_patch_indices(dofs, verts)
            _require_free(skel, "vertex patch skeleton")
            _require_free(inter, "vertex patch interior")
            H, S = _condense(A.matrix, skel, inter)
            _check_spd_batch(S)
            patches += [
                VertexPatch(
                    key=EntityKey(EntityKind.VERTEX, tuple(int(c) for c in verts[p])),
                    skeleton_dofs=skel[p],
                    interior_dofs=inter[p],
                    extension=H[p],
                    schur=S[p],
                )
                for p in range(len(verts))
            ]
    return patches


def build_edge_patches(level: int, A: AssembledOperator, dofs: DofMap) -> list[EdgePatch]:
    return _build_skeleton_patches(level, A, dofs, "edge")


def build_vertex_patches(level: int, A: AssembledOperator, dofs: DofMap) -> list[VertexPatch]:
    return _build_skeleton_patches(level, A, dofs, "vertex")


# -- batched application -------------------------------------------------


class _BatchedGroup:
    """Stacked index sets and precomputed inverses for one patch family."""

    def __init__(self, idx_skel, inv_skel, H, idx_int):
        self.idx_skel = idx_skel
        self.inv_skel = inv_skel
        self.H = H
        self.HT = None if H is None else np.ascontiguousarray(H.transpose(0, 2, 1))
        self.idx_int = idx_int

    @classmethod
    def from_interior(cls, patches: list[InteriorPatch]):
        idx = np.stack([p.dofs for p in patches])
        mats = np.stack([p.matrix for p in patches])
        return cls(idx, np.linalg.inv(mats), None, None)

    @classmethod
    def from_skeleton(cls, patches: list[SkeletonPatch]):
        idx = np.stack([p.skeleton_dofs for p in patches])
        S = np.stack([p.schur for p in patches])
        H = np.stack([p.extension for p in patches])
        idx_int = np.stack([p.interior_dofs for p in patches])
        return cls(idx, np.linalg.inv(S), H, idx_int)

    def accumulate(self, r: np.ndarray, out: np.ndarray) -> None:
        rg = r[self.idx_skel]
        if self.H is None:
            c = (self.inv_skel @ rg[:, :, None])[:, :, 0]
            # cell interiors are pairwise disjoint index sets
            out[self.idx_skel.ravel()] += c.ravel()
            return
        ri = r[self.idx_int]
        rho = rg + (self.HT @ ri[:, :, None])[:, :, 0]
        c = (self.inv_skel @ rho[:, :, None])[:, :, 0]
        out += np.bincount(
            self.idx_skel.ravel(), weights=c.ravel(), minlength=out.shape[0]
        )
        zi = (self.H @ c[:, :, None])[:, :, 0]
        out += np.bincount(
            self.idx_int.ravel(), weights=zi.ravel(), minlength=out.shape[0]
        )


@dataclass
class PatchCollection:
    """All patches of one smoother decomposition on one level."""

    kind: str  # "edge" or "vertex"
    level: int
    n: int
    interior: list[InteriorPatch]
    skeleton: list[SkeletonPatch]
    _groups: list[_BatchedGroup] = field(default_factory=list, repr=False)

    @classmethod
    def build(cls, level: int, A: AssembledOperator, dofs: DofMap, kind: str) -> "PatchCollection":
        if kind not in ("edge", "vertex"):
            raise ValueError(f"unknown decomposition kind {kind!r}")
        interior = build_interior_patches(level, A, dofs)
        skeleton = _build_skeleton_patches(level, A, dofs, kind)
        groups = [_BatchedGroup.from_interior(interior)]
        if skeleton:
            groups.append(_BatchedGroup.from_skeleton(skeleton))
        return cls(
            kind=kind, level=level, n=dofs.n,
            interior=interior, skeleton=skeleton, _groups=groups,
        )

    def __iter__(self):
        yield from self.interior
        yield from self.skeleton

    def apply_corrections(self, r: np.ndarray) -> np.ndarray:
        """Sum of patch corrections over the whole decomposition (no damping)."""
        out = np.zeros_like(r)
        for g in self._groups:
            g.accumulate(r, out)
        return out
