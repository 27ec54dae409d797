"""Tests for the command-line entry point and its exit codes."""

import pytest

import main
from src.result_writer import parse_csv


@pytest.fixture(autouse=True)
def log_to_tmp(tmp_path, monkeypatch):
    monkeypatch.setattr(main, "LOG_FILE", str(tmp_path / "logs" / "relaycap.log"))


def test_rates_success():
    assert main.main(["rates", "--quiet"]) == main.EXIT_OK
    assert main.main(["rates", "--optimal", "--gamma0-db", "20", "--quiet"]) == main.EXIT_OK


def test_alpha_success():
    assert main.main(["alpha", "--gamma0-db", "40", "--quiet"]) == main.EXIT_OK


def test_rates_optimal_with_every_relay_attacked():
    assert main.main(["rates", "--optimal", "--p", "1", "--quiet"]) == main.EXIT_OK


def test_undecodable_config_file_exits_2(tmp_path):
    path = tmp_path / "broken.cfg"
    path.write_bytes(b"system.p = 0.1\n\xff\xfe\n")
    assert main.main(["validate-config", str(path), "--quiet"]) == main.EXIT_CONFIG


@pytest.mark.parametrize(
    "argv",
    [
        ["rates", "--p", "1.5"],
        ["rates", "--alpha", "1.0"],
        ["rates", "--set", "system.q=1"],
        ["rates", "--set", "geometry.region_min=0.5"],
        ["rates", "--config", "does/not/exist.cfg"],
        ["sim", "--n-relays", "0", "--trials", "10"],
    ],
)
def test_config_errors_exit_2(argv):
    assert main.main(argv + ["--quiet"]) == main.EXIT_CONFIG


def test_numeric_failure_exits_3():
    argv = [
        "reproduce", "--figure", "2", "--quiet",
        "--set", "sweep.gamma0_db_start=30", "--set", "sweep.gamma0_db_stop=30",
        "--set", "sweep.alpha_policy=fixed:0",
    ]
    assert main.main(argv) == main.EXIT_NUMERIC


def test_reproduce_writes_csv(tmp_path):
    output = tmp_path / "fig4.csv"
    argv = [
        "reproduce", "--figure", "4", "--quiet", "--output", str(output),
        "--set", "sweep.gamma0_db_start=30", "--set", "sweep.gamma0_db_stop=40",
    ]
    assert main.main(argv) == main.EXIT_OK
    provenance, rows = parse_csv(output.read_text(encoding="utf-8"))
    assert "preset: FIG4" in provenance
    assert len(rows) == 3 * 2

    again = tmp_path / "again.csv"
    argv[argv.index(str(output))] = str(again)
    assert main.main(argv) == main.EXIT_OK
    assert again.read_bytes() == output.read_bytes()


def test_sim_streams_csv_to_stdout(capsys):
    argv = ["sim", "--quiet", "--strategy", "DF", "--n-relays", "20", "--target-rate", "1.0", "--trials", "200"]
    assert main.main(argv) == main.EXIT_OK
    provenance, rows = parse_csv(capsys.readouterr().out)
    assert "preset: SIM" in provenance
    assert len(rows) == 1 and rows[0]["strategy"] == "DF"


def test_validate_config(tmp_path):
    path = tmp_path / "experiment.cfg"
    path.write_text("sweep.preset = FIG5\nsystem.p = 0.3\n", encoding="utf-8")
    assert main.main(["validate-config", str(path)]) == main.EXIT_OK

    path.write_text("system.p = 2\n", encoding="utf-8")
    assert main.main(["validate-config", str(path)]) == main.EXIT_CONFIG
