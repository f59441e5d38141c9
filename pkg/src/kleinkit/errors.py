"""Exception hierarchy shared by every kleinkit module."""


class KleinError(Exception):
    """Base class for all kleinkit errors."""


class ZeroParameter(KleinError, ValueError):
    pass


class NonpositiveRadiusBase(KleinError, ValueError):
    pass


class RadiusNotPositive(KleinError, ValueError):
    pass


class ParameterOutOfRange(KleinError, ValueError):
    pass


class OutOfDomain(KleinError, ValueError):
    pass


class DerivativeUnbounded(KleinError, ValueError):
    pass


class DegenerateVelocity(KleinError, ValueError):
    pass


class DomainMismatch(KleinError, ValueError):
    pass


class DegenerateDirectrix(KleinError, ValueError):
    pass


class NotAntipodalTangents(KleinError, ValueError):
    pass


class NoIdentification(KleinError, ValueError):
    pass


class StepTooLarge(KleinError, ValueError):
    pass


class DegenerateNormal(KleinError, ValueError):
    pass


class InconsistentSeam(KleinError, ValueError):
    pass


class NotWatertight(KleinError, ValueError):
    pass


class TooManyTriangles(KleinError, ValueError):
    pass


class SinkFailure(KleinError, OSError):
    pass


class UnknownParameter(KleinError, ValueError):
    pass
