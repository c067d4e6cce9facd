from __future__ import annotations

import math

import numpy as np
import pytest

from asydim.errors import DomainError
from asydim.io import (INF_TOKEN, format_real, parse_real, provenance_lines, read_csv,
                       read_matrix, read_points, write_csv, write_points)


def test_round_trip_formatting():
    rng = np.random.default_rng(0)
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-30, 30, 200):
        assert parse_real(format_real(x)) == x
    assert format_real(math.inf) == INF_TOKEN
    assert parse_real(INF_TOKEN) == math.inf
    assert format_real(np.int64(7)) == "7"
    assert format_real(True) == "1"


def test_provenance_header():
    lines = provenance_lines("asydim gen lattice", seed=3, extra={"metric": "sup"})
    text = "\n".join(lines)
    assert "command: asydim gen lattice" in text and "seed: 3" in text
    assert "version:" in text and "created:" in text
    assert not any(l.startswith("created") for l in provenance_lines(timestamp=False))


def test_csv_and_points_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, ["a", "b"], [(1, 0.1), ("x", math.inf)], ["hello"])
    comments, cols, rows = read_csv(path)
    assert comments == ["hello"] and cols == ["a", "b"]
    assert rows == [["1", "0.1"], ["x", INF_TOKEN]]
    pts = np.random.default_rng(1).random((15, 3))
    write_points(tmp_path / "p.csv", pts)
    assert np.array_equal(read_points(tmp_path / "p.csv"), pts)


def test_bad_inputs(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    with pytest.raises(DomainError):
        read_points(bad)
    m = tmp_path / "m.csv"
    m.write_text("0,1,2\n1,0,1\n")
    with pytest.raises(DomainError):
        read_matrix(m)
    m.write_text("# comment\n0,1\n1,0\n")
    assert read_matrix(m).tolist() == [[0.0, 1.0], [1.0, 0.0]]
