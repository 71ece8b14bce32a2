"""Exception hierarchy shared by all modules."""


class SharpIneqError(Exception):
    """Base class for every error raised by :mod:`sharpineq`."""


class DomainError(SharpIneqError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ParameterError(SharpIneqError, ValueError):
    """Inequality parameters (p, alpha, gamma, ...) outside the valid range."""


class DimensionMismatchError(SharpIneqError, ValueError):
    pass


class NonDifferentiableError(SharpIneqError, ValueError):
    """Norm gradient requested at a point where the norm is not smooth."""


class UnsupportedError(SharpIneqError, NotImplementedError):
    pass


class DivergenceError(SharpIneqError, ArithmeticError):
    """An integral that should be finite appears to diverge."""


class QuadratureError(SharpIneqError, ArithmeticError):
    """Quadrature failed to reach the requested tolerance.

    The best available estimate is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NormalizationError(SharpIneqError, ValueError):
    pass


class NegativityError(SharpIneqError, ValueError):
    pass
