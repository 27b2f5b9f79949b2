"""
Exception hierarchy for fading-bc.
Every error carries the process exit code the CLI maps it to.
"""


class FadingBCError(Exception):
    """Base class for all errors raised by the toolkit."""

    exit_code = 3


# Configuration (exit 2)
class ConfigError(FadingBCError):
    exit_code = 2


# Computation (exit 3)
class ComputationError(FadingBCError):
    exit_code = 3


class NonPositiveMass(ComputationError):
    pass


class MassSumOutOfTolerance(ComputationError):
    pass


class NegativeGain(ComputationError):
    pass


class BadGridSpec(ComputationError):
    pass


class IncompleteTable(ComputationError):
    pass


class InvalidCsitMap(ComputationError):
    pass


class NonFiniteFunctional(ComputationError):
    pass


class NegativeArgument(ComputationError):
    pass


class PolicyInfeasible(ComputationError):
    pass


class CsitDoesNotDetermineOrder(ComputationError):
    pass


class RequiresPerfectCsit(ComputationError):
    pass


class NoConvergence(ComputationError):
    pass


class BadWeight(ComputationError):
    pass


class RestrictionUnavailable(ComputationError):
    pass


class EmptyRegion(ComputationError):
    pass


class SingularConditioning(ComputationError):
    pass


class NegativeInformation(ComputationError):
    pass


class InvalidSpec(ComputationError):
    pass


class SliceOutOfRange(ComputationError):
    pass


class EmitError(ComputationError):
    pass


class NoCapacityResult(ComputationError):
    """The CSIT map matches none of the closed capacity results."""


# Verification (exit 4)
class VerificationFailed(FadingBCError):
    exit_code = 4
