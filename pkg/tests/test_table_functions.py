import json
import math

import numpy as np
import pandas as pd
import pytest

import pytransmission.plot_functions as plf
import pytransmission.table_functions as tf


def test_round_significant():
    assert tf.round_significant(0.1 + 0.2) == 0.30000000000000004
    assert tf.round_significant(math.nan) is None
    assert tf.round_significant(math.inf) is None


def test_jsonable():
    converted = tf.jsonable({"a": np.float64(1.5), "b": [np.int64(2), math.nan], "c": 1 + 2j, "d": np.bool_(True)})
    assert converted == {"a": 1.5, "b": [2, None], "c": {"re": 1.0, "im": 2.0}, "d": True}
    with pytest.raises(TypeError):
        tf.jsonable(object())


def test_write_csv_header(tmp_path):
    path = tmp_path / "rows.csv"
    frame = pd.DataFrame({"x": [0.1, 1 / 3], "flags": ["", "near-pole"]})
    tf.write_csv(frame, path, {"pair": [1.0, 1.0, 1.0, 4.0]})
    lines = path.read_text().splitlines()
    assert lines[0] == "# format_version=pytransmission/1"
    assert json.loads(lines[1][len("# config="):]) == {"pair": [1.0, 1.0, 1.0, 4.0]}
    assert lines[2] == "x,flags"
    assert lines[4].startswith("0.33333333333333331")

    read, config = tf.read_csv(path)
    assert config["pair"] == [1.0, 1.0, 1.0, 4.0]
    assert read["x"].tolist() == [0.1, 1 / 3]


def test_write_json(tmp_path):
    path = tmp_path / "result.json"
    tf.write_json({"value": math.nan, "zeros": []}, path, {"r": [60.0]})
    document = json.loads(path.read_text())
    assert document["format_version"] == "pytransmission/1"
    assert document["value"] is None
    assert document["config"] == {"r": [60.0]}


def test_data_to_latex():
    frame = pd.DataFrame({"re_lambda": [100.0, 200.0], "sup": [0.5, math.nan]})
    table = tf.data_to_latex(frame, caption="Discrepancy", label="tab:dn", note="Medium (1, 1).")
    assert "\\caption{Discrepancy}" in table
    assert "\\label{tab:dn}" in table
    assert "re\\_lambda & sup" in table
    assert "100 & 0.5\\\\" in table
    assert "200 & --\\\\" in table
    assert "Medium (1, 1)." in table
    with pytest.raises(ValueError):
        tf.data_to_latex([1, 2])
    with pytest.raises(ValueError):
        tf.data_to_latex(frame, caption_position="left")


def test_format_latex_content():
    assert tf.format_latex_content("a &.5") == "a & 0.5"


def test_heatmap_is_byte_stable(tmp_path):
    re_values = np.linspace(1, 2, 5)
    im_values = np.linspace(0, 1, 4)
    grid = np.outer(im_values, re_values)
    grid[0, 0] = -np.inf
    first, second = tmp_path / "a.svg", tmp_path / "b.svg"
    plf.min_modulus_heatmap(re_values, im_values, grid, first, zeros=[1.5 + 0.5j])
    plf.min_modulus_heatmap(re_values, im_values, grid, second, zeros=[1.5 + 0.5j])
    assert first.read_bytes() == second.read_bytes()
    assert b"<svg" in first.read_bytes()
    with pytest.raises(ValueError):
        plf.min_modulus_heatmap(re_values, im_values, np.full((4, 5), np.nan), tmp_path / "c.svg")
