import json
import math

import numpy as np

from export import (
    dumps_json,
    format_value,
    read_csv,
    write_csv,
    write_json
)


def test_format_value() -> None:
    assert format_value(0.1 + 0.2) == "0.3"
    assert format_value(1.0 / 3.0) == "0.333333333333"
    assert format_value(np.float64(2.5e-9)) == "2.5e-09"
    assert format_value(np.int64(7)) == "7"
    assert format_value(True) == "true"
    assert format_value(None) == ""
    assert format_value("pi") == "pi"


def test_csv_uses_lf_and_header(tmp_path) -> None:
    path = tmp_path / "nested" / "rows.csv"
    write_csv(str(path), ["x", "y", "label"], [(1.0, 2, "a"), (0.5, 3, "b")])
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.decode().splitlines()[0] == "x,y,label"

    columns = read_csv(str(path))
    np.testing.assert_array_equal(columns["x"], [1.0, 0.5])
    assert list(columns["label"]) == ["a", "b"]


def test_json_is_deterministic(tmp_path) -> None:
    obj = {"b": np.float64(1.5), "a": [np.int32(1), np.bool_(True)], "c": -0.0}
    text = dumps_json(obj)
    assert text.endswith("\n")
    assert text == dumps_json(dict(reversed(list(obj.items()))))
    assert json.loads(text) == {"a": [1, True], "b": 1.5, "c": 0.0}
    assert "-0.0" not in text

    path = tmp_path / "summary.json"
    write_json(str(path), obj)
    assert path.read_text() == text


def test_json_drops_non_finite_values() -> None:
    parsed = json.loads(dumps_json({"tau": math.inf, "x": [math.nan, 1.0]}))
    assert parsed == {"tau": None, "x": [None, 1.0]}
