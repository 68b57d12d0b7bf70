"""Exception hierarchy shared across the package."""


class ReflectInfoError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(ReflectInfoError):
    """Base class for geometric failures (invalid or degenerate scenes)."""


class NoValidReflection(GeometryError):
    """Tx and Rx placement admits no specular bounce on the given reflector."""


class DegenerateGeometry(GeometryError):
    """Grazing or otherwise ill-posed path geometry (e.g. half-angle at 90 deg)."""


class ZeroDistance(GeometryError):
    """A path or path leg has (numerically) zero length."""


class LambdaOutOfRange(GeometryError):
    """Locus parameter lies outside the admissible open interval."""


class SubcarrierNotInUse(ReflectInfoError):
    """Requested subcarrier index is not part of the active set."""


class SingularPriorCovariance(ReflectInfoError):
    """Prior covariance is numerically singular (correlation magnitude at 1)."""


class SingularNuisanceBlock(ReflectInfoError):
    """Nuisance block of the hybrid FIM cannot be inverted.

    Attributes:
        path_index: index of the offending path, when identifiable.
    """

    def __init__(self, message: str, path_index: int | None = None):
        super().__init__(message)
        self.path_index = path_index


class SingularFim(ReflectInfoError):
    """FIM is not invertible on the requested parameters.

    Attributes:
        null_direction: unit vector spanning (part of) the null space, when known.
    """

    def __init__(self, message: str, null_direction=None):
        super().__init__(message)
        self.null_direction = null_direction


class MissingMeasurement(ReflectInfoError):
    """A per-path information term required for the requested bound is zero."""


class ConfigParseError(ReflectInfoError):
    """Configuration file is malformed, has unknown keys, or is inconsistent."""
