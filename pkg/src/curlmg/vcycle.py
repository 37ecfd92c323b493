"""Symmetric multigrid V-cycle over an assembled level hierarchy.

One cycle at level k runs m damped additive-smoother sweeps, restricts the
residual, recurses once with zero initial guess, prolongates the coarse
correction, and runs m more sweeps.  Level 0 is solved directly by a dense
Cholesky factorization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .assembly import AssembledOperator, CoefficientField, DofMap, assemble
from .errors import DimensionMismatchError
from .lattice import Domain, LatticeMesh, build_hierarchy_meshes
from .linalg import DenseSymFactor
from .patches import PatchCollection
from .smoother import SmootherConfig, smoother_apply
from .transfer import TransferOperator, build_transfer

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class VCycleConfig:
    smoother: SmootherConfig
    steps: int = 1  # pre- and post-smoothing sweeps per cycle

    def __post_init__(self):
        if self.steps < 1:
            raise DimensionMismatchError("smoothing step count must be >= 1")


@dataclass
class LevelData:
    mesh: LatticeMesh
    dofs: DofMap
    op: AssembledOperator
    patches: PatchCollection | None = None  # None on the coarsest level
    transfer: TransferOperator | None = None  # from the level below


class Hierarchy:
    """Meshes, operators, transfer operators and patch decompositions for
    levels 0..L, sharing one coefficient field."""

    def __init__(self, levels: list[LevelData], coeffs: CoefficientField,
                 config: VCycleConfig, coarse_factor: DenseSymFactor,
                 domain: Domain | None = None):
        self.levels = levels
        self.coeffs = coeffs
        self.config = config
        self.coarse_factor = coarse_factor
        self.domain = domain

    @property
    def finest(self) -> int:
        return len(self.levels) - 1

    def n(self, k: int) -> int:
        return self.levels[k].op.n


def galerkin_defect(P: TransferOperator, A_fine, A_coarse) -> float:
    """max-norm of P^T A_k P - A_{k-1}, relative to max |A_{k-1}|."""
    coarse = P.matrix.T @ A_fine.matrix @ P.matrix
    diff = abs(coarse - A_coarse.matrix)
    scale = abs(A_coarse.matrix).max()
    return (diff.max() / scale) if diff.nnz else 0.0


def build_hierarchy(
    domain: Domain,
    levels: int,
    coeffs: CoefficientField,
    smoother: SmootherConfig,
    steps: int = 1,
    meshes: list[LatticeMesh] | None = None,
    check_galerkin: bool = True,
) -> Hierarchy:
    """Assemble operators, transfers and patches for levels 0..levels.

    `meshes` lets callers share one mesh hierarchy across several
    coefficient fields.  With `check_galerkin` the variational coarsening
    identity P^T A_k P = A_{k-1} is verified for every level pair at build
    time (it couples mesh, assembly, elimination and transfer, so a defect
    here means a bug somewhere upstream).
    """
    if meshes is None:
        meshes = build_hierarchy_meshes(domain, levels)
    data: list[LevelData] = []
    for k in range(levels + 1):
        op, dofs = assemble(meshes[k], coeffs)
        entry = LevelData(mesh=meshes[k], dofs=dofs, op=op)
        if k >= 1:
            entry.transfer = build_transfer(data[k - 1].dofs, dofs)
            entry.patches = PatchCollection.build(k, op, dofs, smoother.variant.value)
            if check_galerkin:
                defect = galerkin_defect(entry.transfer, op, data[k - 1].op)
                if defect > 1e-10:
                    raise AssertionError(
                        f"variational coarsening defect {defect:.2e} at levels {k-1}/{k}"
                    )
        data.append(entry)
    coarse_factor = DenseSymFactor(data[0].op.matrix.toarray())
    return Hierarchy(data, coeffs, VCycleConfig(smoother=smoother, steps=steps),
                     coarse_factor, domain=domain)


def mgv(h: Hierarchy, k: int, g: np.ndarray, z0: np.ndarray, m: int) -> np.ndarray:
    """One symmetric V-cycle for A_k z = g with initial guess z0."""
    if k > h.finest or k < 0:
        raise DimensionMismatchError(f"level {k} outside hierarchy 0..{h.finest}")
    if g.shape[0] != h.n(k) or z0.shape[0] != h.n(k):
        raise DimensionMismatchError(
            f"level {k} has {h.n(k)} DOFs, got g {g.shape}, z0 {z0.shape}"
        )
    if k == 0:
        return h.coarse_factor.solve(g)
    if m < 1:
        raise DimensionMismatchError("m >= 1 smoothing steps required for k >= 1")

    lvl = h.levels[k]
    A = lvl.op.matrix
    cfg = h.config.smoother
    P = lvl.transfer.matrix

    z = np.array(z0, dtype=float)
    for _ in range(m):
        z += smoother_apply(cfg, lvl.patches, g - A @ z)
    gbar = P.T @ (g - A @ z)
    z += P @ mgv(h, k - 1, gbar, np.zeros(h.n(k - 1)), m)
    for _ in range(m):
        z += smoother_apply(cfg, lvl.patches, g - A @ z)
    return z


def solve(
    h: Hierarchy,
    f: np.ndarray,
    tol: float = 1e-8,
    max_cycles: int = 100,
    m: int | None = None,
) -> tuple[np.ndarray, int]:
    """Iterate V-cycles until ||f - A z|| <= tol * ||f|| (finest level)."""
    k = h.finest
    if f.shape[0] != h.n(k):
        raise DimensionMismatchError(f"rhs size {f.shape[0]} != {h.n(k)}")
    m = h.config.steps if m is None else m
    A = h.levels[k].op.matrix
    z = np.zeros(h.n(k))
    norm_f = np.linalg.norm(f)
    if norm_f == 0.0:
        return z, 0
    cycles = 0
    while cycles < max_cycles:
        z = mgv(h, k, f, z, m)
        cycles += 1
        if np.linalg.norm(f - A @ z) <= tol * norm_f:
            return z, cycles
    log.warning(
        "V-cycle iteration did not reach tol=%.1e within %d cycles "
        "(residual %.3e)", tol, max_cycles, np.linalg.norm(f - A @ z) / norm_f,
    )
    return z, cycles
