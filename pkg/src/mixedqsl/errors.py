"""Exception types raised by the library.

Every error derives from :class:`QSLError`, itself a ``ValueError``, so callers
that only care about "bad input" can catch one type.
"""


class QSLError(ValueError):
    """Base class for all validation failures."""


class NotHermitian(QSLError):
    pass


class NotPSD(QSLError):
    pass


class TraceNotOne(QSLError):
    pass


class DimensionMismatch(QSLError):
    pass


class RankMismatch(QSLError):
    pass


class NotPure(QSLError):
    pass


class NotIsospectral(QSLError):
    pass


class NonpositiveUncertainty(QSLError):
    pass


class SingularGram(QSLError):
    pass


class RankTooLarge(QSLError):
    pass


class NotHorizontal(QSLError):
    pass


class NotInvolution(QSLError):
    pass


class Degenerate(QSLError):
    pass


class EmptyTrajectory(QSLError):
    pass


class NotProjector(QSLError):
    pass


class UnknownMetric(QSLError):
    pass
