"""
Exceptions for iesguard.

This module contains custom exceptions used throughout the iesguard package.
Simulation-side violations (balance residuals, PMV bands, ramp overruns) are
never raised: the environment turns them into flags and penalties. The
exceptions below cover broken contracts and unusable inputs.
"""

from typing import Any, Dict, Optional


class IesGuardError(Exception):
    """Base exception class for iesguard.

    All other exceptions in the package inherit from this class.
    """
    pass


class ValidationError(IesGuardError):
    """Raised when parameter or configuration validation fails.

    This exception is raised when a parameter set fails validation, such as
    when a value is outside its range or a cross-field invariant (efficiency
    sum, capacity ordering, phase lengths) does not hold.

    Attributes:
        errors: Dictionary of validation errors by field
        field_name: Name of the field that failed validation, if applicable
    """

    def __init__(self, message: str, errors: Optional[Dict[str, Any]] = None, field_name: Optional[str] = None) -> None:
        """Initialize a ValidationError.

        Args:
            message: The error message
            errors: Dictionary of validation errors by field
            field_name: Name of the field that failed validation, if applicable
        """
        super().__init__(message)
        self.errors: Dict[str, Any] = errors or {}
        self.field_name: Optional[str] = field_name


class ContractViolationError(IesGuardError):
    """Raised when an operation is called outside its preconditions.

    Examples are simultaneous charge and discharge of a storage unit, a
    converter input outside its range, a non-finite price level or an hour
    outside ``[0, 24)``.
    """
    pass


class PricingError(ContractViolationError):
    """Raised when price levels leave their ranges or a price gain is zero."""
    pass


class DimensionMismatchError(IesGuardError):
    """Raised when vector or matrix widths do not chain.

    Covers network inputs, residual-test vectors of unequal length, adversary
    masks pointing outside the observation and shape mismatches between
    parameter and gradient arrays.
    """
    pass


class StaleCacheError(IesGuardError):
    """Raised when a forward cache is used after its network was updated."""
    pass


class EpisodeDoneError(IesGuardError):
    """Raised when stepping an episode that has already reached hour 24."""
    pass


class EmptyBufferError(IesGuardError):
    """Raised when sampling from a replay buffer that holds no transitions."""
    pass


class NonFiniteLossError(IesGuardError):
    """Raised when a training loss becomes NaN or infinite.

    Attributes:
        loss_name: Which loss went non-finite
        value: The offending value
    """

    def __init__(self, loss_name: str, value: float) -> None:
        super().__init__(f"Non-finite {loss_name} loss: {value!r}")
        self.loss_name = loss_name
        self.value = value


class ProfileError(ValidationError):
    """Raised when a profile file does not match the column contract."""
    pass


class CheckpointError(IesGuardError):
    """Raised when a checkpoint file cannot be read or has the wrong format."""
    pass


class MissingCheckpointError(CheckpointError):
    """Raised when a matrix cell needs a checkpoint that does not exist."""
    pass


class ReportError(IesGuardError):
    """Raised when report files cannot be written."""
    pass
