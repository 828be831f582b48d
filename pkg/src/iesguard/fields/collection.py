import copy
from typing import Any, Optional, Type

from .base import Field


class ListField(Field):
    """Fixed-type sequence field.

    Values are validated item by item against ``field`` and stored as tuples,
    so parameter sets stay hashable and immutable.

    Attributes:
        field: Field used to validate every item
        min_length: Minimum number of items
        max_length: Maximum number of items

    Examples:
        >>> p2g_range = ListField(FloatField(), min_length=2, max_length=2, default=(100.0, 500.0))
        >>> hidden = ListField(IntField(min_value=1), default=(128, 128))
    """

    def __init__(self, field: Optional[Field] = None, min_length: Optional[int] = None,
                 max_length: Optional[int] = None, **kwargs: Any) -> None:
        # private copy: the item field is renamed after this list during validation
        self.field = copy.copy(field) if field is not None else None
        self.min_length = min_length
        self.max_length = max_length
        super().__init__(**kwargs)
        self.py_type = tuple

    def validate(self, value: Any) -> Optional[tuple]:
        """Validate the sequence and each of its items.

        Raises:
            TypeError: If the value is not a list or tuple
            ValueError: If the length is out of bounds or an item is invalid
        """
        value = super().validate(value)
        if value is None:
            return value
        if not isinstance(value, (list, tuple)):
            raise TypeError(f"Expected list for field '{self.name}', got {type(value)}")
        if self.min_length is not None and len(value) < self.min_length:
            raise ValueError(f"List for '{self.name}' needs at least {self.min_length} items, got {len(value)}")
        if self.max_length is not None and len(value) > self.max_length:
            raise ValueError(f"List for '{self.name}' allows at most {self.max_length} items, got {len(value)}")
        if self.field is None:
            return tuple(value)
        self.field.name = f"{self.name}[]"
        return tuple(self.field.validate(item) for item in value)

    def to_plain(self, value: Any) -> Any:
        if value is None:
            return None
        inner = self.field.to_plain if self.field is not None else (lambda v: v)
        return [inner(item) for item in value]


class EmbeddedField(Field):
    """Field holding a nested parameter set.

    Accepts an instance of ``param_type`` or a plain mapping, which is turned
    into one by overriding the default (this is how nested YAML sections
    become parameter sets).

    Attributes:
        param_type: The ParamSet subclass stored in this field
    """

    def __init__(self, param_type: Type, **kwargs: Any) -> None:
        self.param_type = param_type
        if 'default' not in kwargs:
            kwargs['default'] = param_type
        super().__init__(**kwargs)
        self.py_type = param_type

    def validate(self, value: Any) -> Any:
        """Validate and convert the nested value.

        Raises:
            TypeError: If the value is neither a mapping nor a ``param_type``
        """
        value = super().validate(value)
        if value is None or isinstance(value, self.param_type):
            return value
        if isinstance(value, dict):
            # partial mappings override the field default, not the class defaults
            base = self.get_default()
            if isinstance(base, self.param_type):
                return base.replace(**value)
            return self.param_type.from_dict(value)
        raise TypeError(f"Expected {self.param_type.__name__} or mapping for field '{self.name}', got {type(value)}")

    def to_plain(self, value: Any) -> Any:
        return None if value is None else value.to_dict()
