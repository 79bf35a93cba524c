import json

import numpy as np
import pytest

from jsdiff import report


@pytest.mark.parametrize("x,expected", [
    (3.0, "3.0000000000000000"),
    (0.0, "0.0000000000000000"),
    (-0.5, "-0.50000000000000000"),
    (1e-7, "9.9999999999999995e-08"),
    (1e16, "1.0000000000000000e+16"),
    (1, "1"),
    (True, "true"),
])
def test_fmt(x, expected):
    assert report.fmt(x) == expected


def test_fmt_round_trips():
    rng = np.random.default_rng(3)
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-8, 8, 200):
        assert float(report.fmt(x)) == x


def test_dumps_is_valid_json():
    doc = {"a": [1.5, 2], "b": {"c": None, "d": "x"}, "e": np.float64(0.1), "f": []}
    back = json.loads(report.dumps(doc))
    assert back == {"a": [1.5, 2], "b": {"c": None, "d": "x"}, "e": 0.1, "f": []}


def test_provenance_reproducible():
    p = report.provenance("a", "b", reproducible=True)
    assert "timestamp" not in p and p["tool"] == "jsdiff"
    assert "timestamp" in report.provenance("a", "b", reproducible=False)
    assert report.comment_header({"k": 1}).startswith("# k: 1")
