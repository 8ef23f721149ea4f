import json
import math
import os

import numpy as np
import pytest

from tiercache.io import Table, dumps, emit, format_value, read_table


def sample():
    return Table(["tier", "M", "scdp", "ok", "note"], [["mu", 10, 0.123456789012345, True, None], ["mm", 20, math.nan, False, "x"]],
                 kind="sweep-M", config="ab12", seed=7)


def test_format_value():
    assert format_value(0.1 + 0.2) == "0.3"
    assert format_value(np.float64(1 / 3)) == "0.333333333333"
    assert format_value(np.int64(4)) == "4"
    assert format_value(True) == "1"
    assert format_value(None) == "nan"


def test_csv_layout():
    text = dumps(sample(), "csv")
    lines = text.splitlines()
    assert lines[0] == "# tiercache-csv v1 kind=sweep-M config=ab12 seed=7"
    assert lines[1] == "tier,M,scdp,ok,note"
    assert lines[2] == "mu,10,0.123456789012,1,nan"


def test_json_layout():
    doc = json.loads(dumps(sample(), "json"))
    assert doc["format"] == "tiercache-json" and doc["version"] == 1
    assert doc["rows"][1][2] is None
    assert doc["seed"] == 7


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip(tmp_path, fmt):
    p = tmp_path / f"t.{fmt}"
    emit(sample(), fmt, str(p))
    back = read_table(str(p))
    assert back.columns == sample().columns
    assert (back.kind, back.config, back.seed) == ("sweep-M", "ab12", 7)
    assert back.column("M") == [10, 20]
    assert back.column("scdp")[0] == pytest.approx(0.123456789012, rel=1e-11)
    assert math.isnan(back.column("scdp")[1])
    assert not [f for f in os.listdir(tmp_path) if ".tmp" in f]


def test_emit_stdout(capsys):
    emit(sample(), "csv", "-")
    assert capsys.readouterr().out.startswith("# tiercache-csv v1")


def test_bad_inputs(tmp_path):
    with pytest.raises(ValueError):
        dumps(sample(), "xml")
    p = tmp_path / "plain.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_table(str(p))
