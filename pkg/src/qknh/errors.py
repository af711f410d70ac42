"""
Exceptions raised by the qknh package.
"""

# =============================================================================

__all__ = (
    "QknhError",
    "NoBarrier",
    "DegenerateEnergy",
    "EnergyOutOfRange",
    "EmptyWindow",
    "UnknownSymbol",
    "DegenerateCase",
    "ConfigError",
    "NonConvergence",
    "NoRoot",
    "WindowOverflow",
    "CaseViolation",
    "AllGrowing",
    "GridTooSmall",
    "TrackingLoss",
    "NormDrift",
    "ExperimentError",
)

# =============================================================================


class QknhError(Exception):
    """Base class for every error raised by this package."""

    module: str = "qknh"


# bad input ===================================================================


class NoBarrier(QknhError, ValueError):
    """The potential has no interior maximum at this parameter value."""

    module = "potential"


class DegenerateEnergy(QknhError, ValueError):
    """The energy sits on a barrier top or a well minimum."""

    module = "potential"


class EnergyOutOfRange(QknhError, ValueError):
    """The energy is outside the band with four turning points."""

    module = "semiclassics"


class EmptyWindow(QknhError, ValueError):
    """No level fits in the requested energy window."""

    module = "spectrum"


class UnknownSymbol(QknhError, ValueError):
    """An action symbol was not recognized."""

    module = "semiclassics"


class DegenerateCase(QknhError, ValueError):
    """X and Y both vanish, so no subspace grows or shrinks."""

    module = "knh"


class ConfigError(QknhError, ValueError):
    """The run configuration does not match the schema."""

    module = "config"


# failures during a computation ===============================================


class NonConvergence(QknhError, RuntimeError):
    """A Newton solve for a crossing node did not converge."""

    module = "spectrum"


class NoRoot(QknhError, RuntimeError):
    """The quantum separatrix has no root below the barrier."""

    module = "spectrum"


class WindowOverflow(QknhError, RuntimeError):
    """Amplitude reached the edge of the lattice index window."""

    module = "lznet"


class CaseViolation(QknhError, RuntimeError):
    """Lobe growth rates contradict the requested transition."""

    module = "knh"


class AllGrowing(QknhError, RuntimeError):
    """No subspace shrinks, so there are no transitions."""

    module = "knh"


class GridTooSmall(QknhError, RuntimeError):
    """Eigenfunctions leak to the hard walls of the grid."""

    module = "oracle"


class TrackingLoss(QknhError, RuntimeError):
    """Two tracked eigenvalues can no longer be told apart."""

    module = "oracle"


class NormDrift(QknhError, RuntimeError):
    """A unitary evolution lost norm beyond tolerance."""

    module = "lznet"


class ExperimentError(QknhError, RuntimeError):
    """An experiment failed; wraps the underlying error."""

    module = "runner"

    def __init__(self, message: str, module: str = "runner"):
        super().__init__(message)
        self.module = module
