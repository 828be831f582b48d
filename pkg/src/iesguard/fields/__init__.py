from .base import Field
from .scalar import StringField, NumberField, IntField, FloatField, BooleanField
from .collection import ListField, EmbeddedField

__all__ = [
    'Field',
    'StringField',
    'NumberField',
    'IntField',
    'FloatField',
    'BooleanField',
    'ListField',
    'EmbeddedField',
]
