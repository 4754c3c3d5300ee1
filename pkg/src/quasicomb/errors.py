"""Exception types shared across the package."""


class QuasicombError(Exception):
    """Base class for package errors."""


class SingularLattice(QuasicombError):
    """Generator matrix has zero determinant."""


class ProjectionNotInjective(QuasicombError):
    """A coordinate projection restricted to the lattice is not injective."""

    def __init__(self, projection: str, message: str = ""):
        self.projection = projection
        super().__init__(message or f"projection {projection} is not injective on the lattice")


class NegativePad(QuasicombError):
    """Negative padding/erosion radius."""


class HorizontalLine(QuasicombError):
    """Line parallel to the x-axis: stays inside the wide region forever."""


class IllConditioned(QuasicombError):
    """Gram system condition estimate exceeds the configured cap."""

    def __init__(self, estimate: float, cap: float):
        self.estimate = estimate
        self.cap = cap
        super().__init__(f"condition estimate {estimate:.3e} exceeds cap {cap:.3e}")


class EnvelopeTooWide(QuasicombError):
    """J + [-eps, eps] is not contained in the ambient spectrum region."""


class QuadratureNotConverged(QuasicombError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, achieved: float, target: float):
        self.achieved = achieved
        self.target = target
        super().__init__(f"quadrature error {achieved:.3e} above target {target:.3e}")


class WindowExhausted(QuasicombError):
    """Search window could not be widened enough to satisfy a capacity requirement."""


class ScheduleExhausted(QuasicombError):
    """No cut-height candidate satisfied the stage conditions."""

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class ConditionViolated(QuasicombError):
    """A verified stage condition failed; carries the condition tag and value."""

    def __init__(self, tag: str, value: float, bound: float):
        self.tag = tag
        self.value = value
        self.bound = bound
        super().__init__(f"stage condition {tag} violated: {value:.3e} > {bound:.3e}")


class TruncationDominated(QuasicombError):
    """Summation-formula tail estimate exceeds the requested tolerance."""

    def __init__(self, tail: float, tolerance: float):
        self.tail = tail
        self.tolerance = tolerance
        super().__init__(f"truncation tail {tail:.3e} dominates tolerance {tolerance:.3e}")


class WindowMismatch(QuasicombError):
    """Point-set window does not cover the measure window."""


class ProvenanceMissing(QuasicombError):
    """Measure atoms carry no lattice provenance."""


class ZeroDifference(QuasicombError):
    """Arithmetic progression with zero common difference."""


class ConfigError(QuasicombError):
    """Invalid run configuration."""
