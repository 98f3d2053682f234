"""Exception types raised across the package."""


class DimensionMismatchError(ValueError):
    """Operands do not share the required dimension."""


class ComponentOverflowError(ValueError):
    """Exhaustive enumeration would exceed the configured component budget."""

    def __init__(self, count, max_count):
        self.count = count
        self.max_count = max_count
        super().__init__(
            f"model has {count} components, more than max_count={max_count}; "
            "use a smaller instance or raise max_count explicitly"
        )


class UnsupportedModelError(TypeError):
    """The operation is not defined for this kind of model."""


class NotOntoError(ValueError):
    """The measurement matrix does not have full row rank."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before certifying convergence.

    The best value found so far is kept on ``best_value`` so callers can still
    use it as an upper bound.
    """

    def __init__(self, message, best_value=None, gap=None):
        super().__init__(message)
        self.best_value = best_value
        self.gap = gap
