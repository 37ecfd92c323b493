"""Contraction-number measurement: the largest eigenvalue of the V-cycle
error-propagation operator, by power iteration in the energy inner product,
with a dense brute-force cross-check at small problem sizes.

The error operator E z = z - MGV(k, A_k z, 0, m) of the symmetric cycle is
self-adjoint and positive semidefinite in a(.,.), so the energy Rayleigh
quotient increases monotonically to the spectral radius.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import CurlMGError
from .linalg import power_method
from .vcycle import Hierarchy, mgv

DENSE_GUARD = 2000

#: default stopping rule for contraction_number: relative Rayleigh-quotient
#: change below DEFAULT_TOL for DEFAULT_STREAK consecutive iterations, up
#: to DEFAULT_MAX_IT iterations.  Some benchmark cells (vertex smoother on
#: fine levels) need a higher cap to converge; callers pass max_it
#: explicitly there.
DEFAULT_TOL = 1e-6
DEFAULT_STREAK = 5
DEFAULT_MAX_IT = 1000


@dataclass
class SpectralResult:
    level: int
    steps: int
    rho: float
    iterations: int
    converged: bool
    history: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    seconds: float = 0.0


def apply_error_op(h: Hierarchy, k: int, m: int, z: np.ndarray) -> np.ndarray:
    """E_k^m z = z - MGV(k, A_k z, 0, m)."""
    A = h.levels[k].op.matrix
    return z - mgv(h, k, A @ z, np.zeros_like(z), m)


def contraction_number(
    h: Hierarchy,
    k: int,
    m: int,
    tol: float = DEFAULT_TOL,
    max_it: int = DEFAULT_MAX_IT,
    seed: int = 0,
    x0: np.ndarray | None = None,
    budget_seconds: float | None = None,
    consecutive: int = DEFAULT_STREAK,
) -> SpectralResult:
    """Estimate rho(E_k^m) by power iteration.

    Deterministic for a fixed seed (or explicit start vector x0); the
    returned history holds the Rayleigh-quotient sequence.  An expired
    iteration or time budget is reported through `converged`, never raised.
    """
    if tol <= 0:
        raise CurlMGError("power-iteration tolerance must be positive")
    A = h.levels[k].op.matrix
    if x0 is None:
        rng = np.random.default_rng(seed)
        x0 = rng.uniform(-1.0, 1.0, A.shape[0])
    start = time.monotonic()
    deadline = None if budget_seconds is None else start + budget_seconds
    lam, _, iters, history, converged = power_method(
        lambda z: apply_error_op(h, k, m, z), A, x0,
        tol=tol, max_it=max_it, deadline=deadline, consecutive=consecutive,
    )
    return SpectralResult(
        level=k, steps=m, rho=abs(lam), iterations=iters, converged=converged,
        history=history, seconds=time.monotonic() - start,
    )


def dominant_eigvec(h: Hierarchy, k: int, m: int, **kwargs) -> np.ndarray:
    """Converged power-iteration vector, e.g. to warm-start a nearby run."""
    A = h.levels[k].op.matrix
    seed = kwargs.pop("seed", 0)
    x0 = kwargs.pop("x0", None)
    if x0 is None:
        x0 = np.random.default_rng(seed).uniform(-1.0, 1.0, A.shape[0])
    _, z, _, _, _ = power_method(
        lambda z: apply_error_op(h, k, m, z), A, x0, **kwargs
    )
    return z


def dense_error_matrix(h: Hierarchy, k: int, m: int) -> np.ndarray:
    """E_k^m assembled columnwise; refused above DENSE_GUARD unknowns."""
    n = h.n(k)
    if n > DENSE_GUARD:
        raise CurlMGError(f"dense error matrix refused for n={n} > {DENSE_GUARD}")
    E = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        E[:, j] = apply_error_op(h, k, m, e)
        e[j] = 0.0
    return E


def dense_contraction_number(h: Hierarchy, k: int, m: int) -> tuple[float, np.ndarray]:
    """Exact rho(E_k^m) from a full symmetric eigensolve in a(.,.).

    A E is symmetric because E is A-self-adjoint; the generalized problem
    (A E) v = lambda A v then has the eigenvalues of E itself.
    """
    E = dense_error_matrix(h, k, m)
    A = h.levels[k].op.matrix.toarray()
    AE = A @ E
    skew = np.abs(AE - AE.T).max()
    scale = np.abs(AE).max() or 1.0
    if skew > 1e-9 * scale:
        raise CurlMGError(f"A E is not symmetric (defect {skew / scale:.2e})")
    eigvals = sla.eigh(0.5 * (AE + AE.T), A, eigvals_only=True)
    return float(np.abs(eigvals).max()), E
