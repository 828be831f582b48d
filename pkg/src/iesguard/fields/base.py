"""
Base field class for iesguard parameter sets.

Parameter records (device constants, pricing coefficients, trainer
hyperparameters, run configuration) are declared as classes whose attributes
are ``Field`` instances. The field carries the default, the required flag and
the validation rule; ``iesguard.params.ParamSet`` collects them.
"""
from typing import Any, Optional, Type, TypeVar

from ..signals import pre_validate, post_validate, SIGNAL_SUPPORT

# Type variable for field types
T = TypeVar('T')


class Field:
    """Base class for all field types.

    Attributes:
        required: Whether the field must hold a non-None value
        default: Default value for the field (a callable is called per instance)
        help: One-line description used in config documentation
        name: Name of the field (set during parameter class creation)
        owner: The parameter class that owns this field
    """

    def __init__(self, required: bool = False, default: Any = None, help: Optional[str] = None) -> None:
        """Initialize a new Field.

        Args:
            required: Whether the field is required
            default: Default value for the field
            help: Short description of the field
        """
        self.required = required
        self.default = default
        self.help = help
        self.name: Optional[str] = None  # Will be set during class creation
        self.owner: Optional[Type] = None
        self.py_type: type = object

    def get_default(self) -> Any:
        """Return a fresh default value."""
        return self.default() if callable(self.default) else self.default

    def validate(self, value: Any) -> Any:
        """Validate the field value.

        Subclasses call this first and then apply type-specific checks.

        Args:
            value: The value to validate

        Returns:
            The validated value

        Raises:
            ValueError: If the value is None and the field is required

        Examples:
            >>> field = FloatField(required=True)
            >>> field.validate(None)  # doctest: +IGNORE_EXCEPTION_DETAIL
            Traceback (most recent call last):
            ValueError: Field 'field_name' is required
        """
        if SIGNAL_SUPPORT:
            pre_validate.send(self.__class__, field=self, value=value)

        if value is None and self.required:
            raise ValueError(f"Field '{self.name}' is required")

        if SIGNAL_SUPPORT:
            post_validate.send(self.__class__, field=self, value=value)

        return value

    def to_plain(self, value: Any) -> Any:
        """Convert a validated value to its plain (YAML/JSON) representation."""
        return value

    def __get__(self, instance: Any, owner: Type) -> Any:
        """Descriptor access: the value on instances, the field on the class."""
        if instance is None:
            return self
        return instance._data.get(self.name)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name={self.name!r}, default={self.default!r})"
