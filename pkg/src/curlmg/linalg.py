"""Thin linear-algebra layer: sparse symmetric operators, small dense SPD
factorizations, and the energy inner product.

Sparse matrices are scipy CSR; vectors are plain 1-D numpy arrays indexed
in DofMap order.  Patch operators and the coarsest-level matrix are small
and dense, so a Cholesky factorization covers every direct solve in the
package.
"""

from __future__ import annotations

import math
import time

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import DimensionMismatchError, NotSPDError


def matvec(A: sp.spmatrix, x: np.ndarray) -> np.ndarray:
    if A.shape[1] != x.shape[0]:
        raise DimensionMismatchError(f"matvec: {A.shape} @ {x.shape}")
    return A @ x


def a_inner(A: sp.spmatrix, x: np.ndarray, y: np.ndarray) -> float:
    """Energy inner product x^T A y."""
    if A.shape[1] != x.shape[0] or A.shape[1] != y.shape[0]:
        raise DimensionMismatchError(f"a_inner: {A.shape} with {x.shape}, {y.shape}")
    return float(x @ (A @ y))


class DenseSymFactor:
    """Cholesky factor of a small dense SPD matrix."""

    def __init__(self, M: np.ndarray):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatchError("factor expects a square matrix")
        try:
            self._c, self._lower = sla.cho_factor(M, lower=True)
        except np.linalg.LinAlgError as err:
            raise NotSPDError(f"matrix is not SPD: {err}") from err
        self.n = M.shape[0]

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise DimensionMismatchError(f"solve: factor dim {self.n}, rhs {b.shape}")
        return sla.cho_solve((self._c, self._lower), b)

    @property
    def lower(self) -> np.ndarray:
        """The lower-triangular factor L with M = L L^T."""
        return np.tril(self._c)


def dense_factor(M: np.ndarray) -> DenseSymFactor:
    return DenseSymFactor(M)


def dense_solve(F: DenseSymFactor, b: np.ndarray) -> np.ndarray:
    return F.solve(b)


def check_symmetric(A: sp.spmatrix, rtol: float = 1e-14) -> bool:
    diff = abs(A - A.T)
    scale = abs(A).max() or 1.0
    return diff.max() <= rtol * scale if diff.nnz else True


def power_method(
    apply_op,
    metric: sp.spmatrix,
    z0: np.ndarray,
    tol: float = 1e-6,
    max_it: int = 1000,
    consecutive: int = 5,
    deadline: float | None = None,
):
    """Dominant eigenvalue of an operator self-adjoint in <x, y> = x^T M y.

    Iterates z <- op(z) with M-norm normalization and Rayleigh-quotient
    readout lam = <op(z), z>.  Stops once the relative change of lam stays
    below `tol` for `consecutive` iterations, when `max_it` is reached, or
    past `deadline` (a time.monotonic timestamp).

    Returns (lam, z, iterations, history, converged).
    """
    z = np.array(z0, dtype=float)
    nz = math.sqrt(float(z @ (metric @ z)))
    if nz == 0.0:
        raise ValueError("start vector has zero norm in the metric")
    z /= nz

    history: list[float] = []
    streak = 0
    converged = False
    lam = 0.0
    it = 0
    while it < max_it:
        it += 1
        w = apply_op(z)
        Mw = metric @ w
        lam_new = float(Mw @ z)
        history.append(lam_new)
        nw = math.sqrt(max(float(Mw @ w), 0.0))
        if nw == 0.0 or not math.isfinite(nw):
            lam = lam_new
            converged = nw == 0.0
            break
        if it > 1 and abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            streak += 1
        else:
            streak = 0
        lam = lam_new
        z = w / nw
        if streak >= consecutive:
            converged = True
            break
        if deadline is not None and time.monotonic() > deadline:
            break
    return lam, z, it, np.asarray(history), converged


def export_coo(A: sp.spmatrix, path) -> None:
    """Debug dump in 1-based coordinate text format: 'row col value' lines."""
    coo = sp.coo_matrix(A)
    with open(path, "w") as fh:
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")
