"""Exception hierarchy. Every numerical failure derives from ``LensError``."""


class LensError(Exception):
    """Base class for lenscope failures."""


class DomainError(LensError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class SingularityError(LensError):
    """Evaluation at, or integration across, a field singularity."""


class RangeError(LensError, ValueError):
    """Position outside the tabulated range of a field profile."""


class ConvergenceError(LensError):
    """Series or iteration did not converge within its budget."""


class IntegrationError(LensError):
    """ODE step size underflow or step budget exhausted."""

    def __init__(self, message, z_last=None):
        super().__init__(message)
        self.z_last = z_last


class QuadratureError(LensError):
    """Adaptive quadrature failed to meet its tolerance."""

    def __init__(self, message, worst_interval=None):
        super().__init__(message)
        self.worst_interval = worst_interval


class NotFoundError(LensError):
    """Root search found no sign change in the bracket."""


class ImagePlaneError(LensError):
    """A plane passed as an image plane is not one (or the lens is afocal)."""


class GridError(LensError, ValueError):
    """Grid too coarse or too small for the requested operation."""


class AliasingError(LensError):
    """A quadratic-phase factor is undersampled on the grid."""


class BranchError(LensError):
    """Propagation plan requires the other propagation branch."""
