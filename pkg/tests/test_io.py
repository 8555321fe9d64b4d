import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tlrcool.io import Document, dumps, from_csv, loads, to_csv, to_json

cell = st.one_of(
    st.floats(allow_nan=True, allow_infinity=False),
    st.integers(-10**6, 10**6),
    st.booleans(),
    st.sampled_from(["ok", "unstable", "marginal", "error", "ValueError: a, b"]),
)


def _doc(rows):
    return Document(kind="sweep", columns=["a", "b", "c"], rows=rows, config={"system": {"kappa": 0.1}}, meta={"exact": True})


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(cell, min_size=3, max_size=3), max_size=6), st.sampled_from(["json", "csv"]))
def test_round_trip_is_byte_identical(rows, fmt):
    text = dumps(_doc(rows), fmt)
    assert dumps(loads(text), fmt) == text


def test_nan_written_as_missing():
    doc = _doc([[math.nan, 1.0, "unstable"]])
    assert "\n,1.0,unstable\n" in to_csv(doc)
    assert '"a": null' in to_json(doc)


def test_config_embedded():
    doc = from_csv(to_csv(_doc([[1.0, 2.0, 3.0]])))
    assert doc.config == {"system": {"kappa": 0.1}} and doc.kind == "sweep"


def test_rejects_foreign_files():
    with pytest.raises(ValueError):
        loads('{"tool": "other"}')
    with pytest.raises(ValueError):
        loads("a,b\n1,2\n")
