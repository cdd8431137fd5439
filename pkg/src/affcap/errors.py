"""Exception hierarchy.

The CLI maps these onto exit codes: input and geometry problems exit with 2,
numerical failures with 3.
"""


class AffcapError(Exception):
    """Base class for all errors raised by this package."""


class InputError(AffcapError, ValueError):
    """Invalid argument, dimension mismatch or malformed configuration."""


class GeometryError(AffcapError, ValueError):
    """A body violates a geometric precondition (origin not interior, c <= 0, ...)."""


class NumericalError(AffcapError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy value."""


class IntegrandError(NumericalError):
    """An integrand returned a non-finite value.

    Attributes
    ----------
    node : numpy.ndarray
        The quadrature node at which the failure occurred.
    """

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class PositivityError(NumericalError):
    """A support value fell below the positivity floor.

    Attributes
    ----------
    node : numpy.ndarray
        The offending direction.
    value : float
        The value observed there.
    """

    def __init__(self, message, node=None, value=None):
        super().__init__(message)
        self.node = node
        self.value = value
