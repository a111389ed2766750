"""
Custom exceptions for the application.
"""
from typing import Any, Dict, Optional


class FPDiffError(Exception):
    """Base exception for toolkit errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class ConfigurationError(FPDiffError):
    """Invalid configuration, registry or command-line options."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, 1, details)


class DialectError(FPDiffError):
    """Unsupported dialect tag."""

    def __init__(self, dialect: Any):
        super().__init__(f"Unsupported dialect: {dialect!r}", 1, {"dialect": str(dialect)})


class UnsupportedConstructError(FPDiffError):
    """CUDA construct outside the generated subset."""

    def __init__(self, construct: str):
        self.construct = construct
        super().__init__(
            f"Unsupported CUDA construct: {construct}", 1, {"construct": construct}
        )


class UnmatchedExtensionError(FPDiffError):
    """No registered compiler handles a source file extension."""

    def __init__(self, extension: str):
        self.extension = extension
        super().__init__(
            f"No compiler registered for extension {extension!r}",
            1,
            {"extension": extension},
        )


class CompileError(FPDiffError):
    """Compilation of a generated test failed."""

    def __init__(self, message: str, diagnostics: str = ""):
        self.diagnostics = diagnostics
        super().__init__(message, 2, {"diagnostics": diagnostics})


class OutcomeParseError(FPDiffError):
    """A binary printed something that is not a floating-point result."""

    def __init__(self, raw: str):
        self.raw = raw
        super().__init__(f"Cannot parse outcome from {raw!r}", 2, {"raw": raw})


class EvaluationError(FPDiffError):
    """The reference interpreter met a malformed program."""

    def __init__(self, message: str):
        super().__init__(message, 1)


class SchemaVersionError(FPDiffError):
    """Metadata files with different schema versions."""

    def __init__(self, left: Any, right: Any):
        super().__init__(
            f"Schema version mismatch: {left} != {right}",
            1,
            {"left": left, "right": right},
        )


class ToolchainError(FPDiffError):
    """An external tool could not be started."""

    def __init__(self, message: str = "Toolchain unavailable"):
        super().__init__(message, 1)
