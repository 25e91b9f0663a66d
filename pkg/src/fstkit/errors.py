"""Shared exception types."""


class ContractViolation(ValueError):
    """An operation was invoked outside its documented contract."""


class ParseError(ValueError):
    """Malformed input file. Carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ProviderTransportError(RuntimeError):
    """A translation request failed in transit (timeout, non-200, connection)."""


class ProviderContractError(RuntimeError):
    """A provider returned a response that violates its interface contract."""


class UndefinedCorrelationError(ValueError):
    """Pearson correlation requested for a zero-variance input."""
