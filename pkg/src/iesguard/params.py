"""Declarative, validated parameter sets.

Every constant record in the package (devices, comfort, pricing, penalties,
attack, trainer, run config) is a ``ParamSet`` subclass declared with fields::

    class StorageParams(ParamSet):
        c_max = FloatField(min_value=0, default=200.0)
        eta_ch = FloatField(min_value=0, max_value=1, min_exclusive=True, default=0.9)

        def clean(self):
            if self.c_min > self.c_max:
                raise ValueError("c_min must not exceed c_max")

Instances are validated on construction and read-only afterwards; use
``replace`` to derive a modified copy.
"""
from typing import Any, Dict, List, Type, TypeVar

from .exceptions import ValidationError
from .fields import Field

P = TypeVar('P', bound='ParamSet')


class ParamsMetaclass(type):
    """Metaclass for ParamSet classes: collects fields in declaration order."""

    def __new__(mcs, name: str, bases: tuple, attrs: Dict[str, Any]) -> Type:
        fields: Dict[str, Field] = {}
        fields_ordered: List[str] = []

        # Inherit fields from parent classes
        for base in bases:
            if hasattr(base, '_fields'):
                fields.update(base._fields)
                fields_ordered.extend(f for f in base._fields_ordered if f not in fields_ordered)

        for attr_name, attr_value in list(attrs.items()):
            if isinstance(attr_value, Field):
                fields[attr_name] = attr_value
                if attr_name not in fields_ordered:
                    fields_ordered.append(attr_name)
                attr_value.name = attr_name

        attrs['_fields'] = fields
        attrs['_fields_ordered'] = fields_ordered

        cls = super().__new__(mcs, name, bases, attrs)
        for field in fields.values():
            if field.owner is None:
                field.owner = cls
        return cls


class ParamSet(metaclass=ParamsMetaclass):
    """Base class for immutable, validated parameter records."""

    _fields: Dict[str, Field]
    _fields_ordered: List[str]

    def __init__(self, **values: Any) -> None:
        unknown = sorted(set(values) - set(self._fields))
        if unknown:
            raise ValidationError(
                f"Unknown parameter(s) for {type(self).__name__}: {', '.join(unknown)}",
                errors={key: 'unknown parameter' for key in unknown},
                field_name=unknown[0],
            )

        data: Dict[str, Any] = {}
        errors: Dict[str, str] = {}
        for field_name in self._fields_ordered:
            field = self._fields[field_name]
            value = values[field_name] if field_name in values else field.get_default()
            try:
                data[field_name] = field.validate(value)
            except ValidationError as exc:
                errors[field_name] = str(exc)
            except (TypeError, ValueError) as exc:
                errors[field_name] = str(exc)

        if errors:
            first = next(iter(errors))
            raise ValidationError(
                f"Invalid {type(self).__name__}: {errors[first]}",
                errors=errors,
                field_name=first,
            )

        object.__setattr__(self, '_data', data)
        try:
            self.clean()
        except ValueError as exc:
            raise ValidationError(f"Invalid {type(self).__name__}: {exc}") from exc
        object.__setattr__(self, '_frozen', True)

    def clean(self) -> None:
        """Cross-field checks; raise ``ValueError`` on violation."""

    def __setattr__(self, name: str, value: Any) -> None:
        if getattr(self, '_frozen', False):
            raise AttributeError(f"{type(self).__name__} is read-only; use replace({name}=...)")
        object.__setattr__(self, name, value)

    def replace(self: P, **overrides: Any) -> P:
        """Return a validated copy with some fields changed."""
        merged = dict(self._data)
        merged.update(overrides)
        return type(self)(**merged)

    def to_dict(self) -> Dict[str, Any]:
        """Return the nested plain-dict form (lists instead of tuples)."""
        return {name: self._fields[name].to_plain(self._data[name]) for name in self._fields_ordered}

    @classmethod
    def from_dict(cls: Type[P], data: Dict[str, Any]) -> P:
        """Build an instance from a (possibly partial) plain mapping."""
        if not isinstance(data, dict):
            raise ValidationError(f"{cls.__name__} expects a mapping, got {type(data).__name__}")
        return cls(**data)

    def __getstate__(self) -> Dict[str, Any]:
        return dict(self._data)

    def __setstate__(self, state: Dict[str, Any]) -> None:
        object.__setattr__(self, '_data', dict(state))
        object.__setattr__(self, '_frozen', True)

    def __eq__(self, other: Any) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self._data == other._data

    def __hash__(self) -> int:
        return hash((type(self).__name__, tuple(self._data[name] for name in self._fields_ordered)))

    def __repr__(self) -> str:
        fields = ", ".join(f"{k}={self._data[k]!r}" for k in self._fields_ordered)
        return f"{self.__class__.__name__}({fields})"
