import json
import math

import numpy as np
import pytest

from luminark.utils.fileio import atomic_write_text, dumps_json, json_safe, write_json
from luminark.utils.parallel import ordered_map, resolve_workers


def test_atomic_write_creates_parents_and_leaves_no_temp(tmp_path):
    target = tmp_path / "nested" / "out.txt"
    atomic_write_text(target, "hello\n")
    atomic_write_text(target, "again\n")
    assert target.read_text() == "again\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.txt"]


def test_json_safe_replaces_non_finite():
    assert json_safe({"a": math.inf, "b": [-math.inf, math.nan, 1.5]}) == {"a": "inf", "b": ["-inf", "nan", 1.5]}


def test_json_safe_coerces_numpy_values():
    payload = {"flag": np.bool_(True), "count": np.int64(3), "rate": np.float64(np.inf), "row": np.array([1.5, 2.0])}
    safe = json_safe(payload)
    assert safe == {"flag": True, "count": 3, "rate": "inf", "row": [1.5, 2.0]}
    assert type(safe["flag"]) is bool
    assert type(safe["count"]) is int
    assert dumps_json(payload)


def test_dumps_json_is_sorted_and_stable():
    text = dumps_json({"b": 1, "a": {"d": 2, "c": math.inf}})
    assert text == dumps_json({"a": {"c": math.inf, "d": 2}, "b": 1})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text)["a"]["c"] == "inf"


def test_write_json_ends_with_newline(tmp_path):
    path = write_json(tmp_path / "r.json", {"x": 1})
    assert path.read_text().endswith("}\n")


def test_resolve_workers(monkeypatch, tmp_path):
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path))
    monkeypatch.delenv("LUMINARK_WORKERS", raising=False)
    assert resolve_workers(None) == 1
    assert resolve_workers(4) == 4
    assert resolve_workers(0) == 1
    assert resolve_workers("bogus") == 1
    monkeypatch.setenv("LUMINARK_WORKERS", "3")
    assert resolve_workers(None) == 3


@pytest.mark.parametrize("workers", [1, 2])
def test_ordered_map_keeps_input_order(workers):
    items = [-5, 3, -1, 0, 8, -2]
    assert ordered_map(abs, items, workers=workers) == [5, 3, 1, 0, 8, 2]


def test_ordered_map_empty():
    assert ordered_map(abs, [], workers=4) == []
