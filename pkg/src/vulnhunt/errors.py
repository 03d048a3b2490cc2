"""Exception hierarchy shared across the package."""

from __future__ import annotations


class VulnHuntError(Exception):
    """Base class for all package errors."""


class ExportParseError(VulnHuntError):
    """A call-graph export line is malformed; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class UnknownFuzzerError(VulnHuntError):
    """A fuzzer name has no entry points in the loaded graph."""


class UnknownFunctionError(VulnHuntError):
    """A function id is not present in the graph or store."""


class ValidationError(VulnHuntError):
    """A record failed a domain validation rule."""


class ScoreBelowThresholdError(ValidationError):
    """A suspicious point scored below the skip threshold."""


class LifecycleError(VulnHuntError):
    """An operation violated the suspicious-point lifecycle order."""


class ChainExhaustedError(VulnHuntError):
    """Every model in a fallback chain failed."""

    def __init__(self, chain: list[str], failures: list[str]):
        self.chain = list(chain)
        self.failures = list(failures)
        super().__init__(
            "model chain exhausted: " + "; ".join(failures) if failures else "model chain empty"
        )


class BudgetError(VulnHuntError):
    """A budget is too small for the requested operation."""


class RecipeError(VulnHuntError):
    """A blob recipe is malformed or could not be evaluated."""


class TargetSchemaError(VulnHuntError):
    """A simulated-target definition failed schema validation."""


class OversizeBlobError(VulnHuntError):
    """An input blob exceeds the execution size limit."""


class DiffParseError(VulnHuntError):
    """A unified diff could not be parsed."""


class ConfigError(VulnHuntError):
    """A configuration file or flag set is invalid."""


class StoreError(VulnHuntError):
    """A persistence operation failed or was misused."""
