import json
import math

import numpy as np

from finitefuel import io as fio
from finitefuel import ModelParams, derive_constants


def test_float_format_roundtrips():
    for v in (0.1, 1 / 3, 2.375100220297941, -9.659356928337958e-300, 1e22):
        assert float(fio.fmt(v)) == v
    assert fio.fmt(np.float64(0.5)) == "0.5"
    assert fio.fmt(True) == "1"


def test_json_nonfinite_becomes_null():
    data = json.loads(fio.to_json({"a": math.inf, "b": [np.float64(1.5), np.int64(2)]}))
    assert data == {"a": None, "b": [1.5, 2]}


def test_csv_rewrite_identical():
    text = fio.to_csv(["x", "y", "tag"], [[0.1, 1 / 7, "stop"], [2.0, -3e-17, "act"]])
    header, rows = fio.read_csv(text)
    assert fio.to_csv(header, rows) == text


def test_degenerate_constants_csv():
    p = ModelParams(1.0, 1.0, 1.2)
    text = fio.constants_csv(p, derive_constants(p))
    header, rows = fio.read_csv(text)
    assert header[-1] == "regime" and rows[0][-1] == "degenerate"
    assert rows[0][header.index("f0")] == ""
