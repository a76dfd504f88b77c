"""Exception types shared across the package."""


class ShearcaseError(Exception):
    """Base class for all package-specific errors."""


class DivergenceTooLarge(ShearcaseError):
    """A field submitted for Fourier splitting is not divergence-free.

    Carries the measured projection residual in ``residual``.
    """

    def __init__(self, residual, tol):
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"divergence projection residual {residual:.3e} exceeds tolerance {tol:.3e}"
        )


class BudgetInfeasible(ShearcaseError):
    """A stage of the program construction ran out of parameter budget.

    ``stage`` is 1, 2 or 3; ``achieved`` is the best bound reached.
    """

    def __init__(self, stage, achieved, target, cap):
        self.stage = stage
        self.achieved = achieved
        self.target = target
        self.cap = cap
        super().__init__(
            f"stage {stage} search hit cap {cap}: best bound {achieved:.3e} > target {target:.3e}"
        )


class NonPrimitiveDirection(ShearcaseError):
    """A shearing step direction has gcd > 1; upstream normalisation bug."""


class ProfileNotOdd(ShearcaseError):
    """A shearing profile with cosine terms cannot be encoded as perturbation data."""


class InverseFailed(ShearcaseError):
    """Newton inversion of a sampled map failed to converge."""


class DegenerateForm(ShearcaseError):
    """An interpolated area form dropped below the non-degeneracy floor."""


class AmbiguousLift(ShearcaseError):
    """A polyline edge moves more than pi in the circle factor; winding undefined."""


class PointOnGraph(ShearcaseError):
    """A separation query point lies within one raster cell of the graph."""


class InvalidPeripheral(ShearcaseError):
    """Meridian/longitude words fail the abelianization checks."""


class AbelianizationNontrivial(ShearcaseError):
    """A splice presentation does not have trivial first homology."""


class NoConvergence(ShearcaseError):
    """The representation solver failed to converge at one sample."""


class NoIntersection(ShearcaseError):
    """No intersection of the two image curves was found (diagnostic payload attached)."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class IndexOutOfRange(ShearcaseError):
    """A word references a generator index outside the presentation."""


class SearchSpaceTooLarge(ShearcaseError):
    """Exhaustive certificate search would exceed the configured cap."""


class ConfigError(ShearcaseError):
    """A CLI job configuration failed schema validation."""
