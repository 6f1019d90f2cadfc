"""Exception types shared across the package."""


class HexmvopError(Exception):
    """Base class for all package errors."""


class DegenerateModel(HexmvopError):
    """Parameters force beta = 0: the bounded oval collapses and the genus drops."""


class ShapeViolation(HexmvopError):
    """Weight matrix does not have the unit-diagonal z+1 structure."""


class BranchPointProximity(HexmvopError):
    """Two eigenvalue moduli coincide; caller must use a boundary-value variant."""


class StepTooLarge(HexmvopError):
    """Root continuation ambiguous: two roots compete at the current step size."""


class SingularFrame(HexmvopError):
    """Eigenvector matrix is singular at this point (0, z_min, z_max, or z*)."""


class PoleProximity(HexmvopError):
    """Evaluation point too close to a pole."""


class RootNotBracketed(HexmvopError):
    """A real root expected inside [z_min, z_max] was not found."""


class PeriodInconsistency(HexmvopError):
    """Computed period lattice violates Re tau = 0 / Im tau > 0."""


class PathCrossesBranchPoint(HexmvopError):
    """Integration path passes too close to a branch point; perturb the target."""


class DomainViolation(HexmvopError):
    """Evaluation on a cut without a declared side."""


class CoincidentPoints(HexmvopError):
    """Green kernel evaluated at coinciding points (logarithmic singularity)."""


class ExtrapolationUnstable(HexmvopError):
    """Richardson extractions at different radii disagree beyond tolerance."""


class IllConditioned(HexmvopError):
    """Moment system too ill-conditioned even in extended precision."""


class RootFindingStalled(HexmvopError):
    """Simultaneous root iteration failed to converge."""


class QuadratureUnresolved(HexmvopError):
    """Contour quadrature did not stabilize under node doubling."""
