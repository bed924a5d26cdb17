"""Exception hierarchy shared by all modules."""


class MeridianKitError(Exception):
    """Base class for every error raised by the package."""


class DomainError(MeridianKitError):
    pass


class OverlappingComponents(DomainError):
    pass


class NotHyperbolic(DomainError):
    pass


class BadCap(DomainError):
    pass


class InvalidComponent(DomainError):
    pass


class TrivialSeparation(DomainError):
    pass


class UnsupportedDomain(DomainError):
    """The requested computation needs a bounded window (an unbounded cap)."""


class MetricError(MeridianKitError):
    pass


class OutsideModel(MetricError):
    pass


class OutsideDomain(MetricError):
    pass


class NoConvergence(MetricError):
    pass


class GridTooCoarse(MetricError):
    pass


class CurveTouchesBoundary(MetricError):
    pass


class TopologyError(MeridianKitError):
    pass


class PointOnCurve(TopologyError):
    pass


class CurveMeetsComplement(TopologyError):
    pass


class MalformedCycle(TopologyError):
    pass


class NoPath(TopologyError):
    pass


class FieldDomainMismatch(MeridianKitError):
    pass


class PunctureCollapseError(MeridianKitError):
    pass


class NotSimpleAfterShortening(MeridianKitError):
    pass


class DegenerateDomain(MeridianKitError):
    """Point components present; carries whatever meridians could be computed."""

    def __init__(self, message, partial=()):
        super().__init__(message)
        self.partial = list(partial)
