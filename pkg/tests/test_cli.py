from __future__ import annotations

import json
import subprocess
import sys

import pytest

from infoplan.cli import EX_IOERR, EX_USAGE, main
from infoplan.report import Report, read_csv


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(argv, capsys):
    code, out, _ = run(argv + ["--format", "json"], capsys)
    assert code == 0
    return json.loads(out)


def test_weighing_single(capsys):
    doc = run_json(["weighing", "--n", "4", "--horizon", "2"], capsys)
    assert doc["summary"]["value_bits"] == pytest.approx(2.0, abs=1e-9)
    assert doc["summary"]["stage0_argmax"] == [2, 4]
    assert doc["config"]["n"] == 4 and doc["config"]["seed"] == 0


def test_weighing_target_bits(capsys):
    doc = run_json(["weighing", "--n", "9", "--target-bits", "3.169925001442312"], capsys)
    assert doc["summary"]["horizon"] == 2


def test_guess_sweep(capsys):
    doc = run_json(["guess", "--sweep", "2", "9"], capsys)
    assert doc["summary"]["all_match"] is True
    assert [r["min_stages"] for r in doc["records"]] == [1, 2, 2, 3, 3, 3, 3, 4]


def test_submarine_exact_3x3(capsys):
    doc = run_json(["submarine-exact", "--width", "3", "--oracle"], capsys)
    s = doc["summary"]
    assert s["value_bits"] == pytest.approx(3.169925001442312, abs=1e-9)
    assert s["optimal_starts"] == [2, 4, 6, 8] and s["stage0_coverage"] == [4]
    assert s["oracle_match"] is True


def test_submarine_rollout_summary(capsys):
    doc = run_json(["submarine-rollout", "--sizes", "7"], capsys)
    assert doc["records"] == [{"grid": "7x7", "cells": 49, "measurements": 23, "percentage": 47.9}]


def test_submarine_trajectory_columns(capsys):
    code, out, _ = run(["submarine-rollout", "--width", "4", "--policy", "greedy",
                        "--emit", "trajectory", "--start", "6"], capsys)
    assert code == 0
    meta, rows = read_csv(out)
    assert list(rows[0]) == ["k", "ship_cell", "move", "coverage_u_k", "stage_entropy_bits", "cumulative_bits"]
    assert [int(r["coverage_u_k"]) for r in rows] == [5, 3, 2, 2, 1, 1, 1]
    assert float(rows[-1]["cumulative_bits"]) + meta["summary"]["terminal_bits"] == pytest.approx(4.0)


def test_gp_transect_oracle(capsys):
    doc = run_json(["gp-transect", "--points", "5", "--horizon", "3", "--lookahead", "exhaustive",
                    "--oracle"], capsys)
    assert doc["summary"]["oracle_match"] is True
    assert doc["summary"]["chain_rule_gap"] <= 1e-9


def test_gp_multi_field(capsys):
    doc = run_json(["gp-transect", "--mode", "multi-field", "--signal-variance", "1", "4",
                    "--selection", "one", "--horizon", "3"], capsys)
    assert [r["selection"] for r in doc["records"]] == [[0, 1]] * 3


@pytest.mark.parametrize("argv", [
    ["weighing", "--n", "6", "--horizon", "2"],
    ["guess", "--sweep", "2", "12"],
    ["submarine-exact", "--width", "3", "--all-starts"],
    ["submarine-rollout", "--width", "5", "--policy", "greedy"],
    ["gp-transect", "--mode", "stochastic", "--slip", "0.3", "--samples", "5", "--horizon", "4"],
])
def test_csv_and_json_agree(argv, capsys):
    code, csv_text, _ = run(argv, capsys)
    assert code == 0
    doc = run_json(argv, capsys)
    meta, rows = read_csv(csv_text)
    drop = lambda c: {k: v for k, v in c.items() if k != "format"}
    assert drop(meta["config"]) == drop(doc["config"]) and meta["summary"] == doc["summary"]
    assert meta["experiment"] == doc["experiment"]
    assert list(rows[0]) == doc["columns"]
    for row, rec in zip(rows, doc["records"]):
        for col in doc["columns"]:
            v = rec[col]
            text = row[col]
            if isinstance(v, float):
                assert float(text) == v
            elif isinstance(v, bool):
                assert text == ("true" if v else "false")
            elif isinstance(v, list):
                assert text == ";".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif v is None:
                assert text == ""
            else:
                assert text == str(v)
    assert len(rows) == len(doc["records"])


@pytest.mark.parametrize("argv", [
    ["submarine-rollout", "--width", "6", "--policy", "greedy", "--emit", "trajectory", "--start", "8"],
    ["gp-transect", "--mode", "stochastic", "--slip", "0.4", "--samples", "8", "--seed", "3"],
])
def test_repeated_runs_are_byte_identical(argv, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.csv"
        assert main(argv + ["--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_timings_only_when_requested(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["guess", "--n", "5", "--horizon", "3", "--format", "json", "--out", str(a)])
    main(["guess", "--n", "5", "--horizon", "3", "--format", "json", "--out", str(b), "--timings"])
    assert "timings" not in json.loads(a.read_text())
    assert json.loads(b.read_text())["timings"]["wall_seconds"] >= 0


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample\nn = 8\nhorizon = 3\nseed = 11\n")
    doc = run_json(["weighing", "--config", str(cfg)], capsys)
    assert doc["config"]["n"] == 8 and doc["config"]["seed"] == 11
    doc = run_json(["weighing", "--config", str(cfg), "--n", "5"], capsys)
    assert doc["config"]["n"] == 5 and doc["config"]["horizon"] == 3
    doc = run_json(["weighing", "--config", str(cfg), "--n=6"], capsys)
    assert doc["config"]["n"] == 6


def test_config_list_values(tmp_path, capsys):
    cfg = tmp_path / "gp.cfg"
    cfg.write_text("mode=multi-field\nsignal-variance=1 4\nselection=one\nhorizon=2\n")
    doc = run_json(["gp-transect", "--config", str(cfg)], capsys)
    assert doc["config"]["signal_variance"] == [1.0, 4.0]


@pytest.mark.parametrize("text", ["bogus=1\n", "no separator\n", "tie_break=sideways\n", "n=abc\n"])
def test_bad_config_is_usage_error(tmp_path, capsys, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    code, _, err = run(["weighing", "--config", str(cfg)], capsys)
    assert code == EX_USAGE and err


@pytest.mark.parametrize("argv, code", [
    (["weighing"], 2),
    (["weighing", "--n", "1", "--horizon", "1"], 2),
    (["weighing", "--n", "40", "--horizon", "3", "--state-cap", "10"], 3),
    (["weighing", "--n", "30", "--target-bits", "9", "--max-stages", "3"], 5),
    (["gp-transect", "--noise-variance", "0", "--points", "3", "--horizon", "4", "--start", "1"], 2),
    (["frobnicate"], EX_USAGE),
    (["weighing", "--n", "x"], EX_USAGE),
    (["weighing", "--config", "/nonexistent/file.cfg"], EX_USAGE),
])
def test_exit_codes(argv, code, capsys):
    got, out, err = run(argv, capsys)
    assert got == code
    assert out == "" and err


def test_unwritable_output(capsys):
    code, _, err = run(["guess", "--n", "4", "--horizon", "2", "--out", "/nonexistent/dir/x.csv"], capsys)
    assert code == EX_IOERR and "cannot write" in err


def test_module_entry_point(tmp_path):
    out = tmp_path / "o.csv"
    proc = subprocess.run([sys.executable, "-m", "infoplan", "guess", "--n", "4", "--horizon", "2",
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0 and "done in" in proc.stderr
    meta, rows = read_csv(out.read_text())
    assert meta["experiment"] == "guess" and rows


def test_report_rejects_mismatched_record():
    rep = Report("x", {}, ["a", "b"])
    with pytest.raises(KeyError):
        rep.add(a=1)
    with pytest.raises(ValueError):
        rep.render("xml")
