"""Geometric multigrid for curl-curl model problems on structured
hexahedral meshes, with substructuring smoothers and a spectral harness
that measures V-cycle contraction numbers."""

from .assembly import AssembledOperator, CoefficientField, DofMap, assemble, assemble_rhs
from .element import ElementMatrices, local_matrices
from .errors import (
    AdmissibilityWarning,
    ConfigurationError,
    CurlMGError,
    DimensionMismatchError,
    InvalidCoefficientError,
    InvalidEntityError,
    MeshConsistencyError,
    NotSPDError,
)
from .lattice import (
    Domain,
    EntityKey,
    EntityKind,
    LatticeMesh,
    build_hierarchy_meshes,
    build_initial,
    coarse_entity_members,
    refine,
)
from .linalg import DenseSymFactor, a_inner, dense_factor, dense_solve, matvec, power_method
from .patches import (
    EdgePatch,
    InteriorPatch,
    PatchCollection,
    VertexPatch,
    build_edge_patches,
    build_interior_patches,
    build_vertex_patches,
    patch_correct,
)
from .smoother import (
    ADMISSIBLE_BOUND,
    DEFAULT_DAMPING,
    SmootherConfig,
    SmootherVariant,
    check_spectral_condition,
    smoother_apply,
)
from .spectral import (
    SpectralResult,
    apply_error_op,
    contraction_number,
    dense_contraction_number,
    dense_error_matrix,
)
from .vcycle import Hierarchy, VCycleConfig, build_hierarchy, galerkin_defect, mgv, solve

__version__ = "0.1.0"

from .experiment import (  # noqa: E402  (needs __version__)
    ExperimentConfig,
    TableReport,
    emit,
    preset_config,
    run_table,
)
