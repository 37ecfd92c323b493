"""Structured hexahedral mesh hierarchies on an integer lattice.

Meshes are unions of axis-aligned unit lattice cells; level k refines the
initial cells into 2^k x 2^k x 2^k blocks.  All geometry is integer
arithmetic: a lattice coordinate i at level k maps to the physical
coordinate x = -1 + i * h_k with h_k = 2^-k.  Edges are globally oriented
along the positive axes, so no per-element sign bookkeeping is needed
anywhere downstream.

An entity (vertex/edge/face) is part of the mesh iff it touches at least
one active cell, and it is interior iff *all* lattice cells around it are
active (4 for an edge, 2 for a face, 8 for a vertex).  For unions of full
cells this is exactly the "lies on the domain boundary" test, including
reentrant faces/edges of nonconvex cell unions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import InvalidEntityError, MeshConsistencyError


class Domain(Enum):
    """Benchmark domains: the cube (-1,1)^3 as 2x2x2 unit cells, and the
    nonconvex seven-cell region (-1,1)^3 minus (-1,0)^3."""

    CUBE = "cube"
    FICHERA = "fichera"


class EntityKind(Enum):
    VERTEX = 0
    EDGE_X = 1
    EDGE_Y = 2
    EDGE_Z = 3
    FACE_X = 4
    FACE_Y = 5
    FACE_Z = 6
    CELL = 7


EDGE_KINDS = (EntityKind.EDGE_X, EntityKind.EDGE_Y, EntityKind.EDGE_Z)
FACE_KINDS = (EntityKind.FACE_X, EntityKind.FACE_Y, EntityKind.FACE_Z)

#: transverse axes (t1 < t2) for each edge direction / face normal
TRANSVERSE_AXES = ((1, 2), (0, 2), (0, 1))


@dataclass(frozen=True)
class EntityKey:
    """Entity identified by kind and the lattice coordinates of its anchor
    (minimum corner).  Orientation is implicit: edges point along the
    positive axis of their direction."""

    kind: EntityKind
    coords: tuple[int, int, int]


def _edge_shape(n: int, d: int) -> tuple[int, ...]:
    shape = [n + 1, n + 1, n + 1]
    shape[d] = n
    return tuple(shape)


def _face_shape(n: int, d: int) -> tuple[int, ...]:
    shape = [n, n, n]
    shape[d] = n + 1
    return tuple(shape)


def _shifted_any_all(grid: np.ndarray, pad_axes: tuple[int, ...]):
    """Presence (any adjacent cell) and interiority (all adjacent cells) of
    the entities obtained by padding `grid` along `pad_axes`."""
    pad = [(1, 1) if a in pad_axes else (0, 0) for a in range(3)]
    padded = np.pad(grid, pad)
    slabs = []
    offsets = [(0, 1) if a in pad_axes else (0,) for a in range(3)]
    for ox in offsets[0]:
        for oy in offsets[1]:
            for oz in offsets[2]:
                sl = tuple(
                    slice(o, o + grid.shape[a] + (1 if a in pad_axes else 0))
                    for a, o in enumerate((ox, oy, oz))
                )
                slabs.append(padded[sl])
    stack = np.stack(slabs)
    return stack.any(axis=0), stack.all(axis=0)


def _lex_order(coords: np.ndarray) -> np.ndarray:
    """Sort order for (x, y, z) coordinate rows: z major, then y, then x."""
    return np.lexsort((coords[:, 0], coords[:, 1], coords[:, 2]))


class LatticeMesh:
    """One level of the mesh hierarchy.

    Attributes:
        level:  refinement level k >= 0
        extent: lattice cells per axis of the bounding box (2^(k+1) for the
                benchmark domains)
        cell_grid: bool array [extent]^3, True where a cell is active
        domain: the Domain this hierarchy was built from, or None for
                ad-hoc cell sets (test fixtures)
    """

    def __init__(self, cell_grid: np.ndarray, level: int, domain: Domain | None = None):
        grid = np.asarray(cell_grid, dtype=bool)
        if grid.ndim != 3 or len(set(grid.shape)) != 1:
            raise MeshConsistencyError("cell grid must be a cube-shaped bool array")
        self.cell_grid = grid
        self.level = int(level)
        self.extent = grid.shape[0]
        self.domain = domain

    # -- construction -------------------------------------------------

    @classmethod
    def from_cells(cls, cells, level: int = 0, domain: Domain | None = None) -> "LatticeMesh":
        cells = np.atleast_2d(np.asarray(list(cells), dtype=int))
        n = int(cells.max()) + 1
        grid = np.zeros((n, n, n), dtype=bool)
        grid[cells[:, 0], cells[:, 1], cells[:, 2]] = True
        return cls(grid, level, domain)

    def refine(self) -> "LatticeMesh":
        """Uniform subdivision: every cell splits into 8 children."""
        grid = self.cell_grid
        for axis in range(3):
            grid = np.repeat(grid, 2, axis=axis)
        return LatticeMesh(grid, self.level + 1, self.domain)

    def coarsen(self) -> "LatticeMesh":
        """Parent mesh of a uniformly refined mesh."""
        if self.extent % 2:
            raise MeshConsistencyError("cannot coarsen a mesh of odd extent")
        g = self.cell_grid
        children = g.reshape(self.extent // 2, 2, self.extent // 2, 2, self.extent // 2, 2)
        full = children.all(axis=(1, 3, 5))
        some = children.any(axis=(1, 3, 5))
        if (full != some).any():
            raise MeshConsistencyError("mesh is not a uniform refinement of a parent mesh")
        return LatticeMesh(full, self.level - 1, self.domain)

    # -- geometry -----------------------------------------------------

    @property
    def h(self) -> float:
        """Element side length, 2^-level (initial cells are unit cubes)."""
        return 0.5 ** self.level

    def point(self, coords) -> np.ndarray:
        """Physical coordinates of a lattice point: x = -1 + i * h."""
        return -1.0 + np.asarray(coords, dtype=float) * self.h

    def has_cell(self, i: int, j: int, l: int) -> bool:
        n = self.extent
        if not (0 <= i < n and 0 <= j < n and 0 <= l < n):
            return False
        return bool(self.cell_grid[i, j, l])

    # -- entity masks (presence / interiority on the full lattice grid) --

    @cached_property
    def _edge_masks(self):
        out = []
        for d in range(3):
            transverse = tuple(a for a in range(3) if a != d)
            out.append(_shifted_any_all(self.cell_grid, transverse))
        return out

    @cached_property
    def _face_masks(self):
        return [_shifted_any_all(self.cell_grid, (d,)) for d in range(3)]

    @cached_property
    def _vertex_masks(self):
        return _shifted_any_all(self.cell_grid, (0, 1, 2))

    def edge_present(self, d: int) -> np.ndarray:
        return self._edge_masks[d][0]

    def edge_interior(self, d: int) -> np.ndarray:
        return self._edge_masks[d][1]

    def face_present(self, d: int) -> np.ndarray:
        return self._face_masks[d][0]

    def face_interior(self, d: int) -> np.ndarray:
        return self._face_masks[d][1]

    @property
    def vertex_present(self) -> np.ndarray:
        return self._vertex_masks[0]

    @property
    def vertex_interior(self) -> np.ndarray:
        return self._vertex_masks[1]

    # -- enumerations (deterministic: kind, then z, y, x) ---------------

    def cells(self) -> np.ndarray:
        coords = np.argwhere(self.cell_grid)
        return coords[_lex_order(coords)]

    def edges(self, d: int, interior_only: bool = False) -> np.ndarray:
        mask = self.edge_interior(d) if interior_only else self.edge_present(d)
        coords = np.argwhere(mask)
        return coords[_lex_order(coords)]

    def faces(self, d: int, interior_only: bool = False) -> np.ndarray:
        mask = self.face_interior(d) if interior_only else self.face_present(d)
        coords = np.argwhere(mask)
        return coords[_lex_order(coords)]

    def vertices(self, interior_only: bool = False) -> np.ndarray:
        mask = self.vertex_interior if interior_only else self.vertex_present
        coords = np.argwhere(mask)
        return coords[_lex_order(coords)]

    # -- counts ---------------------------------------------------------

    @property
    def n_cells(self) -> int:
        return int(self.cell_grid.sum())

    def n_edges(self, interior_only: bool = False) -> int:
        return sum(
            int((self.edge_interior(d) if interior_only else self.edge_present(d)).sum())
            for d in range(3)
        )

    def n_faces(self, interior_only: bool = False) -> int:
        return sum(
            int((self.face_interior(d) if interior_only else self.face_present(d)).sum())
            for d in range(3)
        )

    def n_vertices(self, interior_only: bool = False) -> int:
        mask = self.vertex_interior if interior_only else self.vertex_present
        return int(mask.sum())

    # -- membership -----------------------------------------------------

    def contains(self, entity: EntityKey) -> bool:
        i, j, l = entity.coords
        kind = entity.kind
        try:
            if kind is EntityKind.CELL:
                return self.has_cell(i, j, l)
            if kind in EDGE_KINDS:
                return bool(self.edge_present(EDGE_KINDS.index(kind))[i, j, l])
            if kind in FACE_KINDS:
                return bool(self.face_present(FACE_KINDS.index(kind))[i, j, l])
            return bool(self.vertex_present[i, j, l])
        except IndexError:
            return False

    def is_interior(self, entity: EntityKey) -> bool:
        if not self.contains(entity):
            raise InvalidEntityError(f"{entity} is not in this mesh")
        i, j, l = entity.coords
        kind = entity.kind
        if kind in EDGE_KINDS:
            return bool(self.edge_interior(EDGE_KINDS.index(kind))[i, j, l])
        if kind in FACE_KINDS:
            return bool(self.face_interior(FACE_KINDS.index(kind))[i, j, l])
        if kind is EntityKind.VERTEX:
            return bool(self.vertex_interior[i, j, l])
        return True  # cells are volumetric; every active cell is "interior"


def build_initial(domain: Domain) -> LatticeMesh:
    """Initial triangulation: one cell per unit subdomain."""
    grid = np.ones((2, 2, 2), dtype=bool)
    if domain is Domain.FICHERA:
        grid[0, 0, 0] = False  # remove (-1,0)^3
    return LatticeMesh(grid, level=0, domain=domain)


def refine(mesh: LatticeMesh) -> LatticeMesh:
    return mesh.refine()


def build_hierarchy_meshes(domain: Domain, levels: int) -> list[LatticeMesh]:
    """Meshes T_0 .. T_levels by uniform subdivision."""
    meshes = [build_initial(domain)]
    for _ in range(levels):
        meshes.append(meshes[-1].refine())
    return meshes


def cell_children(coords) -> np.ndarray:
    """The 8 child cells of a cell under uniform subdivision."""
    i, j, l = coords
    return np.array(
        [
            (2 * i + a, 2 * j + b, 2 * l + c)
            for c in (0, 1)
            for b in (0, 1)
            for a in (0, 1)
        ]
    )


def cell_parent(coords) -> tuple[int, int, int]:
    i, j, l = coords
    return (i // 2, j // 2, l // 2)


def _fine_edge_keys(d: int, anchors) -> list[EntityKey]:
    kind = EDGE_KINDS[d]
    return [EntityKey(kind, tuple(int(c) for c in a)) for a in anchors]


def coarse_entity_members(
    fine: LatticeMesh, coarse: LatticeMesh, entity: EntityKey
) -> list[EntityKey]:
    """Fine edges associated with a coarse entity under one refinement.

    Cell  -> the 6 fine edges strictly inside it (2 per direction).
    Face  -> the 4 fine edges of the interior cross of its 2x2 subdivision.
    Edge  -> the 2 collinear fine edges on it.
    Vertex-> the fine edges incident to its image point (up to 6).
    """
    if fine.level != coarse.level + 1:
        raise MeshConsistencyError("meshes are not an adjacent level pair")
    if not coarse.contains(entity):
        raise InvalidEntityError(f"{entity} is not in the coarse mesh")

    I, J, L = entity.coords
    kind = entity.kind
    if kind is EntityKind.CELL:
        members = []
        members += _fine_edge_keys(0, [(2 * I + t, 2 * J + 1, 2 * L + 1) for t in (0, 1)])
        members += _fine_edge_keys(1, [(2 * I + 1, 2 * J + t, 2 * L + 1) for t in (0, 1)])
        members += _fine_edge_keys(2, [(2 * I + 1, 2 * J + 1, 2 * L + t) for t in (0, 1)])
        return members
    if kind in FACE_KINDS:
        d = FACE_KINDS.index(kind)
        t1, t2 = (a for a in range(3) if a != d)
        members = []
        for td, to in ((t1, t2), (t2, t1)):
            # edges run along td, offset along to is the midpoint
            for t in (0, 1):
                a = [2 * I, 2 * J, 2 * L]
                a[td] += t
                a[to] += 1
                members += _fine_edge_keys(td, [tuple(a)])
        return members
    if kind in EDGE_KINDS:
        d = EDGE_KINDS.index(kind)
        anchors = []
        for t in (0, 1):
            a = [2 * I, 2 * J, 2 * L]
            a[d] += t
            anchors.append(tuple(a))
        return _fine_edge_keys(d, anchors)
    # vertex: incident fine edges at the image point
    p = (2 * I, 2 * J, 2 * L)
    members = []
    for d in range(3):
        for t in (-1, 0):
            a = list(p)
            a[d] += t
            if min(a) < 0:
                continue
            key = EntityKey(EDGE_KINDS[d], tuple(a))
            if fine.contains(key):
                members.append(key)
    return members
