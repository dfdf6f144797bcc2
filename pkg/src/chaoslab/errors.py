"""Exception types shared across the package."""


class ChaoslabError(Exception):
    """Base class for all library errors."""


class HorizonExceeded(ChaoslabError):
    pass


class InsufficientData(ChaoslabError):
    pass


class UnknownConstruction(ChaoslabError):
    pass


class InvalidParameter(ChaoslabError, ValueError):
    pass


class TruncationTooShort(ChaoslabError):
    pass


class IncompleteProfile(ChaoslabError):
    pass


class WitnessRejected(ChaoslabError):
    pass


class SpacingRejected(ChaoslabError):
    pass


class ScaleRejected(ChaoslabError):
    pass


class ConstructionInconsistent(ChaoslabError):
    pass


class HypothesisViolated(ChaoslabError):
    pass
