"""Exception hierarchy shared by all parawell modules."""


class ParawellError(Exception):
    """Base class for every error raised by this package."""


class GridMismatch(ParawellError):
    pass


class DimensionError(ParawellError):
    pass


class DomainError(ParawellError, ValueError):
    pass


class NoiseShapeError(ParawellError, ValueError):
    pass


class MeshError(ParawellError, ValueError):
    pass


class EmptyInput(ParawellError, ValueError):
    pass


class ConvergenceError(ParawellError, ArithmeticError):
    """Krylov expmv failed to reach its tolerance.

    ``residual`` is the last a posteriori error estimate (relative to the
    input norm) of the worst column.
    """

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual estimate {residual:.3e})")
        self.residual = residual


class ConfigError(ParawellError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
