"""Exception hierarchy."""


class HybridWCError(Exception):
    """Base class for all errors raised by hybridwc."""


class DivisionByZero(HybridWCError, ZeroDivisionError):
    pass


class InvalidPole(HybridWCError, ValueError):
    pass


class OutsideCompactType(HybridWCError, ValueError):
    pass


class NoNonequivariantLimit(HybridWCError, ArithmeticError):
    pass


class InvalidEdge(HybridWCError, ValueError):
    pass


class InvalidDegree(HybridWCError, ValueError):
    pass


class ContainsStableVertex(HybridWCError, ValueError):
    pass


class InternalInvariantViolation(HybridWCError, AssertionError):
    pass


class ConfigError(HybridWCError, ValueError):
    pass
