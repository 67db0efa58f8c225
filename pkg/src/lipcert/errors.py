"""Exception hierarchy.

Every error carries the CLI exit code it maps to: 2 for domain errors
(the inputs are well formed but a precondition fails), 3 for malformed input.
"""


class LipcertError(Exception):
    exit_code = 2


class EmptyPolyhedron(LipcertError):
    pass


class EmptySet(LipcertError):
    pass


class DimensionTooLarge(LipcertError):
    pass


class OutsideDomain(LipcertError):
    pass


class TooManyCells(LipcertError):
    pass


class UnboundedRegionWithQuadratic(LipcertError):
    pass


class UnboundedSet(LipcertError):
    pass


class ClosureNotInDomain(LipcertError):
    pass


class DomainNotFullSpace(LipcertError):
    pass


class DegenerateSegment(LipcertError):
    pass


class NotCertified(LipcertError):
    pass


class EmptyInterior(LipcertError):
    pass


class InvalidLambda(LipcertError):
    pass


class NoFinitePoints(LipcertError):
    pass


class NormMismatch(LipcertError):
    pass


class ConvergenceError(LipcertError):
    pass


class ParseError(LipcertError):
    exit_code = 3
