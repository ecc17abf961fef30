"""Deterministic serialization."""

import json
import math

import numpy as np
import pytest

from odeident.jsonio import csv_text, dumps, format_float


@pytest.mark.parametrize("x, text", [
    (0.5, "0.5"),
    (-0.0, "0"),
    (1.0 / 3.0, "0.33333333333333331"),
    (2.0 ** 100, "1.2676506002282294e+30"),
])
def test_float_formatting(x, text):
    assert format_float(x) == text


def test_non_finite_to_null():
    assert format_float(math.inf) == "null"
    assert format_float(math.nan) == "null"


def test_keys_sorted():
    assert dumps({"b": 1, "a": 2}).index('"a"') < dumps(
        {"b": 1, "a": 2}).index('"b"')


def test_round_trips_through_json():
    payload = {"x": 0.1 + 0.2, "items": [1, 2.5, None, True, "text"]}
    again = json.loads(dumps(payload))
    assert again["x"] == 0.1 + 0.2
    assert again["items"] == [1, 2.5, None, True, "text"]


def test_numpy_values_handled():
    payload = {"a": np.float64(0.5), "b": np.int64(3),
               "c": np.array([1.0, 2.0])}
    again = json.loads(dumps(payload))
    assert again == {"a": 0.5, "b": 3, "c": [1.0, 2.0]}


def test_identical_inputs_identical_bytes():
    payload = {"values": [1.0 / 3.0, 2.0 / 7.0], "n": 12}
    assert dumps(payload) == dumps(json.loads(dumps(payload)))


def test_csv_basic():
    text = csv_text(("a", "b"), [(1.0, "x"), (0.5, None)])
    lines = text.splitlines()
    assert lines[0] == "a,b"
    assert lines[1] == "1,x"
    assert lines[2] == "0.5,"


def test_csv_quotes_commas():
    text = csv_text(("a",), [("hello, world",)])
    assert '"hello, world"' in text


def test_csv_booleans():
    text = csv_text(("flag",), [(True,), (False,)])
    assert text.splitlines()[1:] == ["true", "false"]
