"""Exception types raised by the geometry pipeline."""


class GeometryError(Exception):
    """Base class for every geometric failure the library reports."""

    exit_code = 3


class DimensionMismatch(GeometryError, ValueError):
    pass


class DegenerateSubspace(GeometryError):
    """A null (or numerically null) direction was met during orthonormalization."""


class DegeneratePlane(DegenerateSubspace):
    pass


class NotOnQuadric(GeometryError):
    pass


class WrongCausalType(GeometryError):
    pass


class BasePointMismatch(GeometryError):
    pass


class SingularMetric(GeometryError):
    pass


class NullNormal(GeometryError):
    pass


class RankLoss(GeometryError):
    pass


class UmbilicDegeneracy(GeometryError):
    pass


class HorosphericalSingularity(GeometryError):
    pass


class NegativeRadicand(GeometryError):
    pass


class UnknownExample(GeometryError, KeyError):
    pass


class NotImmersed(GeometryError):
    pass


class SlotMismatch(GeometryError):
    """Slot re-expression of a tangent bivector does not reproduce the bivector."""


class InadmissibleVariation(GeometryError):
    """Variation potential does not vanish on the boundary collar of a clamped chart."""


class NoFeasibleStart(GeometryError):
    pass


class ConfigError(Exception):
    exit_code = 2
