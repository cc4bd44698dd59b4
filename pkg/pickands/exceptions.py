from typing import Optional


class PickandsError(Exception):

    pass


class ContractError(ValueError, PickandsError):
    """
    A precondition of an operation was violated by its arguments.
    """

    def __init__(self, message: Optional[str] = None) -> None:
        if message is None:
            message = "Contract violated"

        super().__init__(message)


class DomainError(ContractError):
    """
    An argument lies outside the domain of a function.
    The error references the bound that was crossed.
    """

    def __init__(self, value: float, bound: str, what: str = "argument") -> None:
        self._value = value
        self._bound = bound

        super().__init__(f"{what} {value!r} outside domain: requires {bound}")

    @property
    def value(self):
        return self._value

    @property
    def bound(self):
        return self._bound


class UnsupportedSpecError(ContractError):
    """
    The exponentially tilted law of the negative half-line leaves the
    supported family of processes.
    """

    def __init__(self, spec: str) -> None:
        message = (
            f"Tilted law of {spec} is not supported; "
            "restrict the window to t >= 0 (window_lo = 0)"
        )

        super().__init__(message)


class ConfigError(ValueError, PickandsError):
    """
    This error occurs when an experiment configuration is invalid.
    The error references the offending field.
    """

    def __init__(self, field: str, message: Optional[str] = None) -> None:
        self._field = field

        if message is None:
            message = "invalid value"

        super().__init__(f"{field}: {message}")

    @property
    def field(self):
        return self._field


class MissingFieldError(ConfigError):
    """
    A mandatory field is absent from the configuration.
    """

    def __init__(self, field: str) -> None:
        super().__init__(field, message="field is required")


class MomentConditionError(ConfigError):
    """
    The Lévy exponent is not finite on the interval required by the
    estimator route.
    """

    def __init__(self, field: str, bound: str) -> None:
        self._bound = bound

        super().__init__(field, message=f"moment condition violated: {bound}")

    @property
    def bound(self):
        return self._bound


class NumericError(PickandsError):

    pass


class FactorizationError(ConfigError, NumericError):
    """
    The covariance matrix could not be factorized even after jitter, so the
    configured variance function is not a valid variogram on the grid.
    """

    def __init__(self, size: int, jitter: float) -> None:
        self._size = size
        self._jitter = jitter

        super().__init__(
            "process.variance",
            message=(
                f"Cholesky factorization of {size}x{size} covariance failed "
                f"(last jitter {jitter:.3e})"
            ),
        )

    @property
    def size(self):
        return self._size

    @property
    def jitter(self):
        return self._jitter
