"""Exception types shared across the package."""


class CurlMGError(ValueError):
    """Base class for all package-specific errors."""


class InvalidEntityError(CurlMGError):
    """An entity key does not belong to the mesh it was used with."""


class MeshConsistencyError(CurlMGError):
    """Mesh adjacency violates a structural assumption (e.g. an interior
    coarse edge without exactly four adjacent cells)."""


class InvalidCoefficientError(CurlMGError):
    """Coefficient field violates beta > 0 or alpha >= 0."""


class NotSPDError(CurlMGError):
    """A matrix expected to be symmetric positive definite is not."""


class DimensionMismatchError(CurlMGError):
    """Operands with incompatible dimensions."""


class ConfigurationError(CurlMGError):
    """Inconsistent solver or experiment configuration."""


class AdmissibilityWarning(UserWarning):
    """Damping factor exceeds the bound that guarantees rho(M^-1 A) <= 1."""
