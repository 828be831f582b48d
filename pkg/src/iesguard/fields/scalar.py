import math
import numbers
from typing import Any, Optional, Union

from .base import Field


class StringField(Field):
    """String field type.

    Attributes:
        choices: Optional list of allowed values

    Examples:
        >>> algorithm = StringField(default='sa-sac', choices=['sac', 'sa-sac'])
    """

    def __init__(self, choices: Optional[list] = None, **kwargs: Any) -> None:
        self.choices: Optional[list] = choices
        super().__init__(**kwargs)
        self.py_type = str

    def validate(self, value: Any) -> Optional[str]:
        """Validate the string value.

        Raises:
            TypeError: If the value is not a string
            ValueError: If the value is not one of the choices
        """
        value = super().validate(value)
        if value is not None:
            if not isinstance(value, str):
                raise TypeError(f"Expected string for field '{self.name}', got {type(value)}")
            if self.choices and value not in self.choices:
                raise ValueError(f"Value {value!r} for '{self.name}' is not one of {self.choices}")
        return value


class NumberField(Field):
    """Base class for numeric fields.

    Bounds are inclusive unless the matching ``*_exclusive`` flag is set, so
    ``FloatField(min_value=0, min_exclusive=True)`` reads "strictly positive".

    Attributes:
        min_value: Minimum allowed value
        max_value: Maximum allowed value
        min_exclusive: Whether the minimum itself is rejected
        max_exclusive: Whether the maximum itself is rejected

    Examples:
        >>> eta = FloatField(min_value=0.0, max_value=1.0, min_exclusive=True, default=0.9)
        >>> episodes = IntField(min_value=1, default=1000)
    """

    def __init__(self, min_value: Optional[Union[int, float]] = None,
                 max_value: Optional[Union[int, float]] = None,
                 min_exclusive: bool = False, max_exclusive: bool = False, **kwargs: Any) -> None:
        self.min_value = min_value
        self.max_value = max_value
        self.min_exclusive = min_exclusive
        self.max_exclusive = max_exclusive
        super().__init__(**kwargs)
        self.py_type = float

    def validate(self, value: Any) -> Optional[Union[int, float]]:
        """Validate the numeric value.

        Raises:
            TypeError: If the value is not a number
            ValueError: If the value is outside the bounds or not finite
        """
        value = super().validate(value)
        if value is None:
            return value
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise TypeError(f"Expected number for field '{self.name}', got {type(value)}")
        if not math.isfinite(value):
            raise ValueError(f"Value for '{self.name}' must be finite, got {value!r}")

        if self.min_value is not None:
            if value < self.min_value or (self.min_exclusive and value == self.min_value):
                bound = '>' if self.min_exclusive else '>='
                raise ValueError(f"Value {value!r} for '{self.name}' must be {bound} {self.min_value}")

        if self.max_value is not None:
            if value > self.max_value or (self.max_exclusive and value == self.max_value):
                bound = '<' if self.max_exclusive else '<='
                raise ValueError(f"Value {value!r} for '{self.name}' must be {bound} {self.max_value}")

        return value


class IntField(NumberField):
    """Integer field type.

    Examples:
        >>> batch = IntField(min_value=1, default=256)
    """

    def __init__(self, **kwargs: Any) -> None:
        super().__init__(**kwargs)
        self.py_type = int

    def validate(self, value: Any) -> Optional[int]:
        """Validate the integer value.

        Raises:
            TypeError: If the value is not an integer
        """
        if value is not None:
            if isinstance(value, bool) or not isinstance(value, numbers.Integral):
                raise TypeError(f"Expected integer for field '{self.name}', got {type(value)}")
            value = int(value)
        value = super().validate(value)
        return None if value is None else int(value)


class FloatField(NumberField):
    """Float field type.

    Integers are accepted and converted, so YAML ``dt: 1`` is fine.

    Examples:
        >>> price = FloatField(min_value=0)
    """

    def validate(self, value: Any) -> Optional[float]:
        """Validate the float value.

        Raises:
            TypeError: If the value cannot be converted to a float
        """
        value = super().validate(value)
        if value is not None:
            try:
                return float(value)
            except (TypeError, ValueError):
                raise TypeError(f"Expected float for field '{self.name}', got {type(value)}")
        return value


class BooleanField(Field):
    """Boolean field type.

    Examples:
        >>> idr_enabled = BooleanField(default=True)
    """

    def __init__(self, **kwargs: Any) -> None:
        super().__init__(**kwargs)
        self.py_type = bool

    def validate(self, value: Any) -> Optional[bool]:
        """Validate the boolean value.

        Raises:
            TypeError: If the value is not a boolean
        """
        value = super().validate(value)
        if value is not None and not isinstance(value, bool):
            raise TypeError(f"Expected boolean for field '{self.name}', got {type(value)}")
        return value
