from typing import Optional


class DomainError(ValueError):
    pass


class TruncationError(ValueError):
    pass


class DegenerateSpectrumError(ValueError):
    pass


class SingularityError(ValueError):
    pass


class ConfigurationError(ValueError):
    def __init__(self, message: str, path: Optional[str] = None) -> None:
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class IntegrationError(RuntimeError):
    def __init__(self, message: str, status: int, nfev: int) -> None:
        self.status = status
        self.nfev = nfev
        super().__init__(f"{message} (status={status}, nfev={nfev})")


class FitError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int) -> None:
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (residual={residual:.6g}, iterations={iterations})")


__all__ = [
    "ConfigurationError",
    "DegenerateSpectrumError",
    "DomainError",
    "FitError",
    "IntegrationError",
    "SingularityError",
    "TruncationError",
]
