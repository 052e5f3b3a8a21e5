"""Exception types shared across the package."""


class ManifoldEffError(Exception):
    """Base class for all package errors."""


# -- geometry ----------------------------------------------------------------

class SingularMetric(ManifoldEffError):
    """Metric matrix is not invertible at the requested point."""


class OutOfChart(ManifoldEffError):
    """A point violates the chart domain predicate."""


class ChartExit(ManifoldEffError):
    """An integrated trajectory left the chart domain."""


class ToleranceNotMet(ManifoldEffError):
    """The adaptive integrator could not meet the configured error bound."""


class CutLocus(ManifoldEffError):
    """Logarithmic map requested across the cut locus."""


class NoConvergence(ManifoldEffError):
    """Iterative solver (shooting / Newton) failed to converge."""


class DegeneratePlane(ManifoldEffError):
    """Sectional curvature requested for a (nearly) degenerate 2-plane."""


class NotPSD(ManifoldEffError):
    """A matrix that must be positive semi-definite is not."""


class DimensionMismatch(ManifoldEffError):
    """Array shapes are inconsistent with the manifold dimension."""


# -- models ------------------------------------------------------------------

class ProposalUnbounded(ManifoldEffError):
    """Rejection-sampler acceptance ratio could not be bounded on the chart region."""


class QuadratureFail(ManifoldEffError):
    """Numerical quadrature failed a sanity check."""


class SingularInformation(ManifoldEffError):
    """Fisher information matrix is numerically singular."""


# -- estimators ----------------------------------------------------------------

class NotConverged(ManifoldEffError):
    """Estimating-equation iteration did not reach tolerance."""


class NonConvexRegion(ManifoldEffError):
    """Sample is not contained in a geodesically convex ball."""


class SingularMean(ManifoldEffError):
    """Averaged influence Jacobian is numerically singular."""


class PositivityViolation(ManifoldEffError):
    """A propensity value fell below the configured positivity floor."""


class NotTangent(ManifoldEffError):
    """Vector is not tangent to the constraint manifold."""


class SingularEfficientInformation(ManifoldEffError):
    """Efficient-score outer product is numerically singular."""


# -- bounds ------------------------------------------------------------------

class PriorNotSmooth(ManifoldEffError):
    """Prior density does not vanish at its support boundary."""


# -- harness -----------------------------------------------------------------

class ConfigError(ManifoldEffError):
    """Experiment specification is invalid."""
