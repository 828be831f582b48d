"""Field descriptors and parameter sets."""
import pickle

import pytest

from iesguard.devices import ConverterParams, StorageParams
from iesguard.environment import SystemParams
from iesguard.exceptions import ValidationError
from iesguard.fields import EmbeddedField, FloatField, IntField, ListField, StringField
from iesguard.params import ParamSet


class Inner(ParamSet):
    x = FloatField(min_value=0, default=1.0)


class Outer(ParamSet):
    name = StringField(default='a', choices=['a', 'b'])
    count = IntField(min_value=1, default=3)
    sizes = ListField(IntField(min_value=1), min_length=1, default=(4, 4))
    inner = EmbeddedField(Inner)


def test_defaults_and_read_only():
    o = Outer()
    assert o.name == 'a'
    assert o.count == 3
    assert o.sizes == (4, 4)
    assert o.inner == Inner()
    with pytest.raises(AttributeError):
        o.count = 5


def test_unknown_parameter_rejected():
    with pytest.raises(ValidationError) as exc:
        Outer(colour='red')
    assert exc.value.field_name == 'colour'


@pytest.mark.parametrize('overrides, field', [
    ({'count': 0}, 'count'),
    ({'name': 'c'}, 'name'),
    ({'sizes': []}, 'sizes'),
    ({'count': 'three'}, 'count'),
])
def test_field_validation_errors(overrides, field):
    with pytest.raises(ValidationError) as exc:
        Outer(**overrides)
    assert field in exc.value.errors


def test_replace_validates_and_keeps_original():
    o = Outer()
    p = o.replace(count=7)
    assert p.count == 7 and o.count == 3
    with pytest.raises(ValidationError):
        o.replace(count=-1)


def test_nested_dict_merges_onto_default():
    o = Outer.from_dict({'inner': {'x': 2.5}, 'sizes': [8]})
    assert o.inner.x == 2.5
    assert o.sizes == (8,)


def test_to_dict_from_dict_and_pickle():
    o = Outer(count=5, inner=Inner(x=0.5))
    plain = o.to_dict()
    assert plain == {'name': 'a', 'count': 5, 'sizes': [4, 4], 'inner': {'x': 0.5}}
    assert Outer.from_dict(plain) == o
    assert pickle.loads(pickle.dumps(o)) == o
    assert hash(Outer.from_dict(plain)) == hash(o)


def test_clean_errors_become_validation_errors():
    with pytest.raises(ValidationError):
        ConverterParams(mt_eta_e=0.5)
    with pytest.raises(ValidationError):
        StorageParams(c_max=100.0, c0=150.0)


def test_system_params_scenarios():
    base = SystemParams()
    assert base.for_scenario(1).hsd_enabled and base.for_scenario(1).idr_enabled
    s4 = base.for_scenario(4)
    assert not s4.hsd_enabled and not s4.idr_enabled
    assert s4.effective_hsd.c_max == 0.0
    assert s4.esd == base.esd
    with pytest.raises(ValidationError):
        base.for_scenario(5)


def test_list_fields_do_not_share_item_field():
    item = IntField(min_value=1)

    class Left(ParamSet):
        a = ListField(item, default=(1,))

    class Right(ParamSet):
        b = ListField(item, default=(2,))

    Left(a=[3])
    Right(b=[4])
    assert item.name is None
    with pytest.raises(ValidationError, match=r"b\[\]"):
        Right(b=[0])
