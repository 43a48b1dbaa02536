"""CLI: flag parsing, config files, CSV/JSON emission, exit codes."""
from __future__ import annotations

import csv
import json

import pytest

from boxsearch import cli
from boxsearch.society import WorldConfig


def run_cli(*args: str) -> int:
    return cli.main(list(args))


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


BASE = ["--sigma", "0.5", "--cost", "0.1", "--rounds", "20", "--runs", "60",
        "--seed", "3"]


def test_header_is_exact_contract(tmp_path):
    out = tmp_path / "out"
    assert run_cli(*BASE, "--output", str(out)) == 0
    rows = read_csv(out / "results.csv")
    assert rows[0] == cli.CSV_COLUMNS
    assert rows[0] == [
        "sigma", "T", "mean_avg_utility", "se_avg_utility",
        "alt_convention_utility", "mean_max_quality", "se_max_quality",
        "mean_items_explored", "runs", "seed", "model", "cost",
        "diamond_p", "diamond_D",
    ]


def test_sidecar_round_trip_is_byte_identical(tmp_path):
    first = tmp_path / "a"
    second = tmp_path / "b"
    assert run_cli(*BASE, "--output", str(first)) == 0
    assert run_cli("--config", str(first / "results.json"),
                   "--output", str(second)) == 0
    assert (first / "results.csv").read_bytes() == (second / "results.csv").read_bytes()


def test_worker_flag_does_not_change_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(*BASE, "--output", str(a), "--workers", "1") == 0
    assert run_cli(*BASE, "--output", str(b), "--workers", "4") == 0
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()


def test_repeatable_sigma_stacks_series(tmp_path):
    out = tmp_path / "out"
    assert run_cli("--sigma", "0", "--sigma", "1", "--cost", "0.1",
                   "--rounds", "10", "--runs", "30", "--output", str(out)) == 0
    rows = read_csv(out / "results.csv")[1:]
    assert sorted({r[0] for r in rows}) == ["0", "1"]


def test_rounds_grid_flag(tmp_path):
    out = tmp_path / "out"
    assert run_cli(*BASE, "--rounds-grid", "1,5,20", "--output", str(out)) == 0
    rows = read_csv(out / "results.csv")[1:]
    assert [r[1] for r in rows] == ["1", "5", "20"]


def test_exit_2_on_invalid_cost(tmp_path, capsys):
    code = run_cli("--sigma", "0.5", "--cost", "0.5", "--rounds", "5",
                   "--runs", "5", "--output", str(tmp_path / "x"))
    assert code == 2
    assert "cost" in capsys.readouterr().err


def test_exit_2_on_missing_required_flags(tmp_path, capsys):
    assert run_cli("--sigma", "0.5", "--output", str(tmp_path / "x")) == 2
    err = capsys.readouterr().err
    assert "--cost" in err and "--rounds" in err


def test_exit_2_on_bad_diamond_and_grid(tmp_path):
    assert run_cli(*BASE, "--diamond", "0.1", "--output", str(tmp_path / "x")) == 2
    assert run_cli(*BASE, "--rounds-grid", "1,two", "--output", str(tmp_path / "y")) == 2


def test_exit_2_on_unknown_config_key(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text("[experiment]\nsigma = 0.5\nwidgets = 7\n")
    assert run_cli("--config", str(cfg), "--output", str(tmp_path / "x")) == 2


def test_ini_config_with_flag_override(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(
        "[experiment]\n"
        "sigma = 0, 0.5\n"
        "cost = 0.1\n"
        "rounds = 12\n"
        "runs = 40\n"
        "seed = 9\n"
    )
    out = tmp_path / "out"
    assert run_cli("--config", str(cfg), "--runs", "25", "--output", str(out)) == 0
    rows = read_csv(out / "results.csv")[1:]
    assert {r[8] for r in rows} == {"25"}  # flag beat the file
    assert {r[9] for r in rows} == {"9"}  # file seed kept
    sidecar = json.loads((out / "results.json").read_text())
    assert sidecar["experiment"]["runs"] == 25
    assert sidecar["experiment"]["sigmas"] == [0.0, 0.5]


def test_headerless_ini_accepted(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("sigma = 0.5\ncost = 0.1\nrounds = 8\nruns = 20\n")
    out = tmp_path / "out"
    assert run_cli("--config", str(cfg), "--output", str(out)) == 0


def test_diamond_columns_round_trip(tmp_path):
    out = tmp_path / "out"
    assert run_cli("--sigma", "1", "--cost", "0.3", "--rounds", "15",
                   "--runs", "30", "--model", "revealed-value",
                   "--diamond", "0.02,10", "--output", str(out)) == 0
    rows = read_csv(out / "results.csv")
    p_col, d_col = rows[0].index("diamond_p"), rows[0].index("diamond_D")
    assert {r[p_col] for r in rows[1:]} == {"0.02"}
    assert {r[d_col] for r in rows[1:]} == {"10"}
    # and empty when no diamond
    out2 = tmp_path / "out2"
    assert run_cli(*BASE, "--output", str(out2)) == 0
    rows2 = read_csv(out2 / "results.csv")
    assert {r[p_col] for r in rows2[1:]} == {""}


def test_check_bounds_writes_reports(tmp_path):
    out = tmp_path / "out"
    assert run_cli("--sigma", "0", "--cost", "0.1", "--rounds", "20",
                   "--runs", "200", "--rounds-grid", "1,2,10,20",
                   "--check-bounds", "--output", str(out)) == 0
    rows = read_csv(out / "bounds.csv")
    assert rows[0] == cli.BOUNDS_COLUMNS
    assert len(rows) > 1
    assert all(r[3] == "true" for r in rows[1:])


def test_check_bounds_exit_1_on_violation(tmp_path, monkeypatch):
    from boxsearch.bounds import BoundReport

    def fake_reports(config, points):
        return [BoundReport("forced", 1.0, 2.0, False, -1.0)]

    monkeypatch.setattr(cli, "curve_bound_reports", fake_reports)
    code = run_cli(*BASE, "--check-bounds", "--output", str(tmp_path / "x"))
    assert code == 1


def test_presets_construct_valid_configs():
    for name, preset in cli.PRESETS.items():
        configs = preset.configs()
        assert all(isinstance(c, WorldConfig) for c in configs)
        assert len(configs) == len(preset.sigmas)
    fig = cli.PRESETS["figure1-c01"]
    assert fig.sigmas == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert fig.cost == 0.1 and fig.runs == 10**5 and fig.rounds == 100
    assert cli.PRESETS["figure1-c02"].cost == 0.2
    demo = cli.PRESETS["diamond-demo"]
    assert demo.diamond == (0.002, 100.0) and demo.rounds == 5000
    assert cli.PRESETS["bounds-grid"].check_bounds


def test_preset_flag_overrides(tmp_path):
    out = tmp_path / "out"
    assert run_cli("--preset", "figure1-c01", "--runs", "20", "--rounds", "10",
                   "--sigma", "0.5", "--output", str(out)) == 0
    rows = read_csv(out / "results.csv")[1:]
    assert {r[0] for r in rows} == {"0.5"}
    assert {r[8] for r in rows} == {"20"}


def test_grid_125_shape():
    assert cli._grid_125(100) == [1, 2, 5, 10, 20, 50, 100]
    assert cli._grid_125(10**4)[-1] == 10**4
    grid = cli._grid_125(10**5)
    assert len(grid) == 16 and grid[0] == 1 and grid[-1] == 10**5


def test_fmt_17_digits_round_trips():
    for x in (0.1, 1 / 3, 2.0**-40, 123456789.123456789):
        assert float(cli._fmt(x)) == x
