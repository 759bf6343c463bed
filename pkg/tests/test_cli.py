"""Command-line interface: subcommands, exit codes, deterministic output."""

import json
import subprocess
import sys

import pytest

SCENARIO = {
    "documents": {"count": 100, "size": "1 MB"},
    "copies": 2,
    "sector": {"half_life": "1 Mh"},
    "audit": {"documents": {"cycle": "1 my", "segments": 1, "strategy": "systematic"}},
    "horizon": "3 my",
}


def presim(*args):
    return subprocess.run(
        [sys.executable, "-m", "presim", *args],
        capture_output=True,
        text=True,
    )


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(SCENARIO))
    return str(path)


def test_run_writes_csv(scenario_file, tmp_path):
    out = tmp_path / "run.csv"
    proc = presim("run", "--scenario", scenario_file, "--runs", "5", "--seed", "1",
                  "--out", str(out), "--format", "csv")
    assert proc.returncode == 0, proc.stderr
    lines = out.read_text().splitlines()
    assert lines[0].startswith("run_count,mean_lost_fraction")
    assert lines[1].split(",")[0] == "5"


def test_run_repeats_are_byte_identical(scenario_file, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        proc = presim("run", "--scenario", scenario_file, "--runs", "6", "--seed", "3",
                      "--out", str(path))
        assert proc.returncode == 0, proc.stderr
    assert a.read_bytes() == b.read_bytes()


def test_run_worker_count_does_not_change_output(scenario_file, tmp_path):
    a, b = tmp_path / "w1.csv", tmp_path / "w8.csv"
    r1 = presim("run", "--scenario", scenario_file, "--runs", "8", "--seed", "5",
                "--workers", "1", "--out", str(a))
    r8 = presim("run", "--scenario", scenario_file, "--runs", "8", "--seed", "5",
                "--workers", "8", "--out", str(b))
    assert r1.returncode == 0 and r8.returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_grid_inline_json(scenario_file, tmp_path):
    out = tmp_path / "sweep.csv"
    proc = presim("sweep", "--scenario", scenario_file,
                  "--grid", '{"copies": [1, 2]}',
                  "--runs", "3", "--seed", "2", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    lines = out.read_text().splitlines()
    assert lines[0].startswith("copies,run_count")
    assert len(lines) == 3


def test_sweep_grid_from_file(scenario_file, tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text('{"copies": [1, 2]}')
    proc = presim("sweep", "--scenario", scenario_file, "--grid", f"@{grid}",
                  "--runs", "2", "--seed", "2")
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.splitlines()[0].startswith("copies,")


def test_search_json_output(scenario_file):
    proc = presim("search", "--scenario", scenario_file,
                  "--candidates", '{"copies": [1, 2]}',
                  "--mode", "min-loss", "--budget", "inf",
                  "--runs", "3", "--seed", "4", "--format", "json")
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(proc.stdout)
    assert doc["mode"] == "min-loss"
    assert doc["feasible"] is True
    assert doc["selected"]["copies"] == 2


def test_validation_error_exit_code_1(scenario_file, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**SCENARIO, "sector": {"half_life": "-5 Mh"}}))
    proc = presim("run", "--scenario", str(bad), "--runs", "1", "--seed", "0")
    assert proc.returncode == 1
    assert "sector.half_life" in proc.stderr


def test_unwritable_output_exit_code_2(scenario_file):
    proc = presim("run", "--scenario", scenario_file, "--runs", "1", "--seed", "0",
                  "--out", "/nonexistent-dir/results.csv")
    assert proc.returncode == 2


def test_calc_subcommands():
    proc = presim("calc", "p-single", "--blocks", "1", "--half-life", "100 Mh",
                  "--t", "10 my")
    assert proc.returncode == 0
    assert float(proc.stdout) == pytest.approx(6.9291e-4, rel=1e-4)

    proc = presim("calc", "unaudited-fraction", "--docs", "1000", "--draws", "1000")
    assert float(proc.stdout) == pytest.approx(0.36770, abs=5e-5)

    proc = presim("calc", "byzantine-replicas", "--subverted", "2", "--span", "3")
    assert proc.stdout.strip() == "10"

    proc = presim("calc", "compression-benefit", "--ratio", "1.2", "--fragility", "1",
                  "--compressed-fragility", "1")
    assert proc.stdout.strip() == "true"

    proc = presim("calc", "fragility-equivalent", "--docs", "10000", "--blocks", "10",
                  "--fragility", "2")
    doc = json.loads(proc.stdout)
    assert doc["doc_count"] == 20000 and doc["size_blocks"] == 5 and doc["exact"]


def test_preset_emission_parses_back(tmp_path):
    out = tmp_path / "keys.json"
    proc = presim("preset", "encryption-keys", "--out", str(out))
    assert proc.returncode == 0
    doc = json.loads(out.read_text())
    assert doc["copies"] == 4

    proc = presim("preset", "format-obsolescence", "--readers", "3")
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["copies"] == 3


def test_env_var_sets_default_workers(scenario_file, tmp_path):
    import os
    env = dict(os.environ, PRESIM_WORKERS="2")
    proc = subprocess.run(
        [sys.executable, "-m", "presim", "run", "--scenario", scenario_file,
         "--runs", "4", "--seed", "9"],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.splitlines()[1].split(",")[0] == "4"
