import math

import numpy as np
from hypothesis import given, strategies as st

from spheronlab import io as sio


def test_numpy_and_complex_conversion():
    rec = {"a": np.float64(0.1), "b": np.arange(3), "c": 1 + 2j, "d": np.nan, "e": np.bool_(True)}
    assert sio.to_jsonable(rec) == {"a": 0.1, "b": [0, 1, 2], "c": {"re": 1.0, "im": 2.0}, "d": None, "e": True}


def test_key_order_preserved():
    text = sio.dumps({"z": 1, "a": 2})
    assert text.index('"z"') < text.index('"a"')
    assert text.endswith("\n")


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), max_size=20))
def test_float_round_trip(values):
    assert sio.loads(sio.dumps(values)) == values
    header, rows = sio.read_csv(sio.csv_text(["v"], [[v] for v in values]))
    assert header == ["v"] and [r[0] for r in rows] == values


def test_csv_shortest_repr():
    assert sio.csv_text(["x"], [[0.1], [np.float64(1 / 3)]]) == "x\n0.1\n0.3333333333333333\n"


def test_read_levels(tmp_path):
    p = tmp_path / "levels.csv"
    p.write_text("index,eps\n0,0.0\n1,0.5\n# comment\n2,1.0\n")
    assert list(sio.read_levels(str(p))) == [0.0, 0.5, 1.0]
    p.write_text("0.25 0.75\n")
    assert list(sio.read_levels(str(p))) == [0.75]


def test_infinity_becomes_null():
    assert sio.loads(sio.dumps([math.inf, -math.inf])) == [None, None]
