"""Lowest-order hexahedral edge element: local curl-curl and mass matrices.

The element has 12 degrees of freedom, the average tangential component
along each edge of the cube.  On the unit reference cell [0,1]^3 the basis
function dual to the x-edge at transverse position (b, c) is

    N = (phi_b(y) * phi_c(z), 0, 0),   phi_0(t) = 1 - t,  phi_1(t) = t,

and cyclically for y- and z-edges.  With this (scale-free) normalization
the mass matrix scales as h^3 and the curl-curl matrix as h.

Local edge ordering (fixed table used by the assembler as well):
index 0..3  x-edges at (y,z) offsets (0,0), (1,0), (0,1), (1,1)
index 4..7  y-edges at (x,z) offsets (0,0), (1,0), (0,1), (1,1)
index 8..11 z-edges at (x,y) offsets (0,0), (1,0), (0,1), (1,1)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import TRANSVERSE_AXES as TRANSVERSE

OFFSETS = ((0, 0), (1, 0), (0, 1), (1, 1))
#: (direction, offset on lower transverse axis, offset on upper transverse axis)
LOCAL_EDGES = tuple((d, o1, o2) for d in range(3) for (o1, o2) in OFFSETS)


def local_edge_anchor(cell, local_index: int) -> tuple[int, int, int]:
    """Lattice anchor of a local edge of the cell at lattice coords `cell`."""
    d, o1, o2 = LOCAL_EDGES[local_index]
    t1, t2 = TRANSVERSE[d]
    a = [int(cell[0]), int(cell[1]), int(cell[2])]
    a[t1] += o1
    a[t2] += o2
    return tuple(a)


def _phi(o: int, t: np.ndarray) -> np.ndarray:
    return t if o else 1.0 - t


def _dphi(o: int, t: np.ndarray) -> np.ndarray:
    return np.full_like(t, 1.0 if o else -1.0)


def basis_values(points: np.ndarray) -> np.ndarray:
    """Values of the 12 reference basis functions, shape (npts, 12, 3)."""
    points = np.atleast_2d(points)
    out = np.zeros((points.shape[0], 12, 3))
    for e, (d, o1, o2) in enumerate(LOCAL_EDGES):
        t1, t2 = TRANSVERSE[d]
        out[:, e, d] = _phi(o1, points[:, t1]) * _phi(o2, points[:, t2])
    return out


def basis_curls(points: np.ndarray) -> np.ndarray:
    """Curls of the 12 reference basis functions, shape (npts, 12, 3)."""
    points = np.atleast_2d(points)
    out = np.zeros((points.shape[0], 12, 3))
    for e, (d, o1, o2) in enumerate(LOCAL_EDGES):
        t1, t2 = TRANSVERSE[d]
        f1, f2 = _phi(o1, points[:, t1]), _phi(o2, points[:, t2])
        g1, g2 = _dphi(o1, points[:, t1]), _dphi(o2, points[:, t2])
        # curl of a single-component field e_d * f(x_t1, x_t2):
        # the derivative along t2 enters with sign +1 into component t1 of
        # the curl when (d, t1, t2) is an even permutation pattern; working
        # the three cases out explicitly keeps the signs obvious.
        if d == 0:  # N = (f(y,z), 0, 0): curl = (0, d/dz f, -d/dy f)
            out[:, e, 1] = f1 * g2
            out[:, e, 2] = -g1 * f2
        elif d == 1:  # N = (0, f(x,z), 0): curl = (-d/dz f, 0, d/dx f)
            out[:, e, 0] = -f1 * g2
            out[:, e, 2] = g1 * f2
        else:  # N = (0, 0, f(x,y)): curl = (d/dy f, -d/dx f, 0)
            out[:, e, 0] = f1 * g2
            out[:, e, 1] = -g1 * f2
    return out


def gauss_points(order: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre rule on [0,1]^3."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    pts = np.array([(x, y, z) for x in nodes for y in nodes for z in nodes])
    w = np.array([wx * wy * wz for wx in weights for wy in weights for wz in weights])
    return pts, w


def _reference_matrices() -> tuple[np.ndarray, np.ndarray]:
    # integrands are polynomials of degree <= 2 per variable, so the 2-point
    # rule integrates them exactly
    pts, w = gauss_points(2)
    vals = basis_values(pts)
    curls = basis_curls(pts)
    M = np.einsum("q,qid,qjd->ij", w, vals, vals)
    K = np.einsum("q,qid,qjd->ij", w, curls, curls)
    return K, M


_K_REF, _M_REF = _reference_matrices()


@dataclass(frozen=True)
class ElementMatrices:
    """Curl-curl matrix K and mass matrix M for a cube element of side h."""

    K: np.ndarray
    M: np.ndarray
    h: float


def local_matrices(h: float) -> ElementMatrices:
    """Element matrices for side length h: K(h) = h K(1), M(h) = h^3 M(1)."""
    if h <= 0:
        raise ValueError(f"element side must be positive, got {h}")
    return ElementMatrices(K=h * _K_REF, M=h**3 * _M_REF, h=h)
