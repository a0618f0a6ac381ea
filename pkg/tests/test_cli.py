import json

import pandas as pd
import pytest

from pytransmission import cli
import pytransmission.table_functions as tf


def run(*args):
    return cli.main([*args, "--no-progress"])


def test_help_exits_cleanly(capsys):
    assert cli.main(["--help"]) == 0
    assert "dn-compare" in capsys.readouterr().out


def test_unknown_command():
    assert cli.main(["bogus"]) == 2


def test_symbols_csv(tmp_path):
    out = tmp_path / "symbols.csv"
    assert run("symbols", "--pair", "1,1,1,4", "--xi", "0.5,1,3", "--out", str(out)) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# format_version=pytransmission/1"
    assert lines[1].startswith("# config=")
    assert lines[2].startswith("xi,r0,rho1_re")
    frame, config = tf.read_csv(out)
    assert len(frame) == 3
    assert config["command"] == "symbols"
    assert config["pair"] == [1.0, 1.0, 1.0, 4.0]
    assert "threads" not in config and "out" not in config


def test_output_is_byte_identical_across_runs(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("symbols", "--out", str(first), "--theta", "0.2") == 0
    assert run("symbols", "--out", str(second), "--theta", "0.2", "--threads", "3") == 0
    assert first.read_bytes() == second.read_bytes()


def test_config_file_and_flag_override(tmp_path):
    config_path = tmp_path / "run.toml"
    config_path.write_text('pair = "1,1,2,1"\ntheta = 0.2\n')
    out = tmp_path / "symbols.json"
    assert run("symbols", "--config", str(config_path), "--theta", "0.3", "--format", "json", "--out", str(out)) == 0
    document = json.loads(out.read_text())
    assert document["config"]["theta"] == 0.3
    assert document["config"]["pair"] == [1.0, 1.0, 2.0, 1.0]
    assert document["case"] == "aniso_positive_distinct"


def test_unknown_config_key(tmp_path):
    config_path = tmp_path / "run.toml"
    config_path.write_text("colour = 3\n")
    assert run("symbols", "--config", str(config_path), "--out", str(tmp_path / "s.csv")) == 2


def test_bad_values_exit_2(tmp_path):
    out = str(tmp_path / "x.csv")
    assert run("dn-compare", "--re", "", "--out", out) == 2
    assert run("symbols", "--pair", "1,1,1", "--out", out) == 2
    assert run("scan", "--box", "2,1,0,1", "--out", out) == 2
    assert run("symbols", "--out", str(tmp_path / "missing" / "x.csv")) == 2


def test_dn_compare_fixed_rule(tmp_path):
    out = tmp_path / "dn.csv"
    tex = tmp_path / "dn.tex"
    code = run("dn-compare", "--re", "100", "--im-rule", "fixed:5", "--threads", "1",
               "--weighted", "--out", str(out), "--tex", str(tex))
    assert code == 0
    frame, config = tf.read_csv(out)
    assert frame["im_lambda"].tolist() == [5.0]
    assert "weighted_sup" in frame.columns
    assert config["im_rule"] == "fixed:5"
    assert "\\begin{table}" in tex.read_text()


def test_free_region_refusal(tmp_path):
    assert run("free-region", "--pair", "1,1,2,1", "--kind", "strip", "--out", str(tmp_path / "f.json")) == 4


def test_scan_json_and_svg(tmp_path):
    out, svg = tmp_path / "scan.json", tmp_path / "scan.svg"
    code = run("scan", "--pair", "1,1,1,4", "--box", "2,8,0.1,1", "--m-max", "0", "--threads", "1",
               "--out", str(out), "--svg", str(svg), "--nx", "8", "--ny", "6")
    assert code == 0
    document = json.loads(out.read_text())
    assert document["format_version"] == "pytransmission/1"
    assert document["meta"]["runtime_ms"] is None
    assert document["meta"]["m_max"] == 0
    assert "svg" not in document["config"]
    assert b"<svg" in svg.read_bytes()


def test_scan_is_identical_across_thread_counts(tmp_path):
    first, second = tmp_path / "one.json", tmp_path / "two.json"
    args = ("scan", "--box", "2,8,0.1,1", "--m-max", "1")
    assert run(*args, "--threads", "1", "--out", str(first)) == 0
    assert run(*args, "--threads", "2", "--out", str(second)) == 0
    assert first.read_bytes() == second.read_bytes()


def test_timing_fills_runtime(tmp_path):
    out = tmp_path / "scan.json"
    assert run("scan", "--box", "2,8,0.1,1", "--m-max", "0", "--threads", "1", "--timing", "--out", str(out)) == 0
    assert json.loads(out.read_text())["meta"]["runtime_ms"] > 0


def test_build_run_config_layers():
    config = cli.build_run_config("weyl", {"r": [30, 60]}, {"r": "40"})
    assert config["r"] == [40.0]
    assert config["out"] == "weyl.csv"
    with pytest.raises(cli.ConfigError):
        cli.build_run_config("weyl", {"radius": 4})


@pytest.mark.slow
def test_dn_compare_acceptance_run(tmp_path):
    out = tmp_path / "dn.csv"
    assert run("dn-compare", "--re", "100,200,400,800", "--im-rule", "sqrt", "--out", str(out)) == 0
    frame = pd.read_csv(out, comment="#")
    assert len(frame) == 4
    assert frame["sup_over_abs_lambda"].is_monotonic_decreasing


@pytest.mark.slow
def test_parametrix_check_default_run(tmp_path):
    assert run("parametrix-check", "--out", str(tmp_path / "p.csv")) == 0


@pytest.mark.slow
def test_scan_acceptance_run(tmp_path):
    out = tmp_path / "scan.json"
    assert run("scan", "--pair", "1,1,1,4", "--box", "1,15,0.01,8", "--out", str(out)) == 0
    document = json.loads(out.read_text())
    assert document["zeros"]
    assert not document["meta"]["flags"]
    assert all("unresolved" not in zero["flags"] for zero in document["zeros"])
