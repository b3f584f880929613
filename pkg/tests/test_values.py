import json
import random
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zoea.values import (
    Empty,
    EmptyPresent,
    ParseError,
    ShapeError,
    Table,
    canonical_json,
    contains_empty,
    decode_value,
    deep_equal,
    encode_value,
    from_json,
    kind_of,
    to_json,
    type_of,
)

from conftest import random_value

json_scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(-10**6, 10**6),
    st.text(max_size=12),
)
json_values = st.recursive(
    json_scalars,
    lambda inner: st.one_of(
        st.lists(inner, max_size=4),
        st.dictionaries(st.text(max_size=6), inner, max_size=4),
    ),
    max_leaves=12,
)


class TestKinds:
    def test_shapes(self):
        assert kind_of("x") == "scalar"
        assert kind_of([1]) == "list"
        assert kind_of({"a": 1}) == "object"
        assert kind_of(Table([[1]])) == "table"
        assert kind_of(Empty("list")) == "list"

    def test_types(self):
        assert type_of("x") == "text"
        assert type_of(True) == "boolean"
        assert type_of(3) == "number"
        assert type_of(Decimal("3.5")) == "number"
        assert type_of(None) == "null"

    def test_bool_is_not_number(self):
        assert type_of(True) != type_of(1)
        assert not deep_equal(True, 1)
        assert not deep_equal(0, False)


class TestTable:
    def test_requires_rectangular(self):
        with pytest.raises(ShapeError):
            Table([[1, 2], [3]])

    def test_requires_nonempty(self):
        with pytest.raises(ShapeError):
            Table([])
        with pytest.raises(ShapeError):
            Table([[]])

    def test_equal_to_rows(self):
        t = Table([[1, 2], [3, 4]])
        assert deep_equal(t, [[1, 2], [3, 4]])
        assert deep_equal([[1, 2], [3, 4]], t)
        assert not deep_equal(t, [[1, 2], [4, 3]])

    def test_json_form_is_array_of_arrays(self):
        assert json.loads(to_json(Table([[1, 2], [3, 4]]))) == [[1, 2], [3, 4]]

    def test_from_json_with_table_hint(self):
        t = from_json("[[1,2],[3,4]]", hint="table")
        assert isinstance(t, Table)
        with pytest.raises(ShapeError):
            from_json("[[1,2],[3]]", hint="table")


class TestJson:
    def test_decimal_lexical_form_survives(self):
        v = from_json("2.50")
        assert isinstance(v, Decimal)
        assert to_json(v) == "2.50"

    def test_empty_cannot_serialize(self):
        with pytest.raises(EmptyPresent):
            to_json([1, Empty("scalar")])

    def test_bad_text(self):
        with pytest.raises(ParseError):
            from_json("{nope")

    @settings(max_examples=150, deadline=None)
    @given(json_values)
    def test_round_trip(self, v):
        assert deep_equal(from_json(to_json(v)), v)


class TestDeepEqual:
    def test_object_order_insensitive(self):
        assert deep_equal({"a": 1, "b": 2}, {"b": 2, "a": 1})

    def test_numeric_across_types(self):
        assert deep_equal(Decimal("2.0"), 2)
        assert not deep_equal(Decimal("2.5"), 2)

    def test_mismatched_shapes(self):
        assert not deep_equal([1], {"a": 1})
        assert not deep_equal("1", 1)


class TestTaggedEncoding:
    @settings(max_examples=150, deadline=None)
    @given(json_values)
    def test_round_trip(self, v):
        assert deep_equal(decode_value(encode_value(v)), v)

    def test_empty_and_table(self):
        e = Empty("list")
        assert decode_value(encode_value(e)) == e
        t = Table([[1, "x"]])
        back = decode_value(encode_value(t))
        assert isinstance(back, Table)
        assert deep_equal(back, t)

    def test_number_keeps_lexical_form(self):
        enc = encode_value(Decimal("1.20"))
        assert enc["v"] == "1.20"
        assert to_json(decode_value(enc)) == "1.20"


def test_contains_empty():
    assert contains_empty([1, [Empty("scalar")]])
    assert not contains_empty([1, [2]])
    assert contains_empty({"k": Empty("table")})


def test_canonical_json_is_stable():
    rng = random.Random(3)
    for _ in range(50):
        v = random_value(rng)
        assert canonical_json(v) == canonical_json(json.loads(to_json(v)))
