"""Exception hierarchy for the toolkit.

Errors split into two families: input/precondition problems (bad patch data,
points too close to the boundary, ...) and mathematical cross-check failures
(two independent computation routes disagreeing).  The latter are the most
valuable failure mode of the whole toolkit: they signal a convention bug, not
a user mistake.
"""


class TwistorcheckError(Exception):
    """Base class for all errors raised by this package."""


class IncompatibleStructure(TwistorcheckError):
    """Patch data violates J^2 = -Id, metric compatibility, or positivity."""


class DegeneratePivot(TwistorcheckError):
    """Every remaining seed column collapsed during frame orthogonalization."""


class BoundaryProximity(TwistorcheckError):
    """A finite-difference stencil would leave the coordinate domain."""


class SingularMetric(TwistorcheckError):
    """Metric matrix is numerically non-invertible."""


class FrameDiscontinuity(TwistorcheckError):
    """Pivot sequence changed between displaced frame evaluations."""


class CrossPathMismatch(TwistorcheckError):
    """Two independent computation routes disagree beyond tolerance."""


class ChainViolation(TwistorcheckError):
    """An inequality of the non-degeneracy bound chain failed."""


class WrongPatch(TwistorcheckError):
    """Operation requires a patch attribute the given patch does not carry."""


class ChartOverflow(TwistorcheckError):
    """Point left the validity region of the chart."""


class NotInSigma(TwistorcheckError):
    """Matrix does not anticommute with the reference complex structure."""
