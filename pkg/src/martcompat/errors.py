"""Exception types shared across the package."""


class MartcompatError(Exception):
    """Base class for all library-specific failures."""


class MiddleEigenvalueError(MartcompatError):
    """The stretch tensor's middle eigenvalue is too far from one, so no
    rank-one connection to a rotation exists for the given pair."""

    def __init__(self, lambda_mid, bound):
        self.lambda_mid = lambda_mid
        self.bound = bound
        super().__init__(
            "middle eigenvalue %.12g deviates from 1 by %.3g (allowed %.3g)"
            % (lambda_mid, abs(lambda_mid - 1.0), bound)
        )


class NoTwinAxis(MartcompatError):
    """No two-fold axis of the point group relates the two stretch tensors."""


class HypothesisFailed(MartcompatError):
    """A checkable hypothesis of the underlying result does not hold for the
    supplied data, so the conclusion cannot be evaluated."""


class DegenerateDenominator(MartcompatError):
    """A closed-form shear solution requires division by a quantity that
    vanishes for this input."""


class NoBranch(MartcompatError):
    """Neither span condition needed by the shear-amount solver holds."""


class OrderingFailed(MartcompatError):
    """The wedge interfaces cannot be ordered by increasing angle around the
    junction axis, so the layered geometry is not realizable."""


class OrthogonalityFailed(MartcompatError):
    """A vector that must be perpendicular to the junction axis is not."""
