"""Typed errors raised by the library.

Errors split in two families: :class:`InvalidEdge` for bad user input
(mapped to exit code 2 by the CLI) and :class:`NumericalError` for
numerical failures (exit code 3).
"""


class HoneycombError(Exception):
    """Base class for all library errors."""


class InvalidEdge(HoneycombError, ValueError):
    """Input describes no valid edge or termination."""


class NotCoprime(InvalidEdge):
    pass


class IncompatibleTermination(InvalidEdge):
    pass


class ClassicalZigzagUnsupported(InvalidEdge):
    """The general offset machinery needs distinct transverse offsets."""


class NumericalError(HoneycombError, ArithmeticError):
    """A computation could not be carried out reliably."""


class ExceptionalQuasimomentum(NumericalError):
    pass


class Unsolvable(NumericalError):
    pass


class DomainError(NumericalError):
    pass


class RootOnCircle(NumericalError):
    pass


class MultipleRoot(NumericalError):
    pass


class NoState(NumericalError):
    pass


class IllConditioned(NumericalError):
    pass


class OutOfBand(NumericalError):
    pass


class InEssentialSpectrum(NumericalError):
    pass


class ZeroEigenvector(NumericalError):
    pass


class PhaseStepTooLarge(NumericalError):
    pass


class CircleHitsEssentialSpectrum(NumericalError):
    pass


class NotCertified(NumericalError):
    pass
