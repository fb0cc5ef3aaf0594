"""Exception types shared across the package."""


class SpinspecError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(SpinspecError):
    """A problem description failed structural validation."""


class EllipticityError(SpinspecError):
    """The induced metric is degenerate or indefinite somewhere on the grid."""


class ChargeInconsistent(SpinspecError):
    """The two orientation-charge formulas disagree or are not near +/-1."""


class MetricMismatch(SpinspecError):
    """Two frames that should share a metric induce different metrics."""


class SpinStructureMismatch(SpinspecError):
    """Global sign propagation of the SU(2) lift failed around a cycle.

    Attributes
    ----------
    cycles : list of str
        Names of the obstructed fundamental cycles, e.g. ``["x3"]``.
    """

    def __init__(self, cycles, message=None):
        self.cycles = list(cycles)
        if message is None:
            message = "no continuous SU(2) lift: obstruction around cycle(s) %s" % (
                ", ".join(self.cycles) or "<none>"
            )
        super().__init__(message)


class LiftIllConditioned(SpinspecError):
    """Pointwise rotation data is too degenerate or the grid too coarse to lift."""


class VanishingSpinor(SpinspecError):
    """A spinor field dips below the minimum allowed norm."""


class TruncationTooSmall(SpinspecError):
    """Operator coefficients carry frequencies the plane-wave cutoff cannot see."""


class NonpositiveWeight(SpinspecError):
    """The scalar weight is not strictly positive on the grid."""


class ConvergenceFailure(SpinspecError):
    """The dense eigendecomposition did not converge or failed residual checks."""


class OutsideTrustWindow(UserWarning):
    """Counting-function samples fall outside the trusted part of the spectrum."""
