"""Exceptions raised by the Kuramoto tree toolkit."""


class KuramotoError(ValueError):
    """Base class for every domain error."""


class NotATree(KuramotoError):
    """Edge list has a cycle, is disconnected, or references a bad vertex."""


class LengthMismatch(KuramotoError):
    pass


class NonFiniteFrequency(KuramotoError):
    pass


class BadParameters(KuramotoError):
    """Generator, estimator or CLI parameter outside its domain."""


class NotACutVertex(KuramotoError):
    pass


class NotACutEdge(KuramotoError):
    pass


class NonFiniteState(KuramotoError):
    """Integrator produced NaN or infinity."""


class BracketInvalid(KuramotoError):
    pass


class DegenerateFit(KuramotoError):
    pass


class TooLarge(KuramotoError):
    pass


class ParseError(KuramotoError):
    """Document could not be read or does not match its schema."""


# Errors that mean "the input document does not describe a valid Kuramoto tree"
STRUCTURE_ERRORS = (NotATree, LengthMismatch, NonFiniteFrequency)
