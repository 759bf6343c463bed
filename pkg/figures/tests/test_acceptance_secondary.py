"""Secondary acceptance: plot the shapes the main acceptance experiments use.

Drives the installed presim CLI (the only interface this package consumes)
to produce small sweep CSVs shaped like the replication/auditing,
server-lifetime and span-shock experiments, renders each chart, and checks
the plotted values equal the CSV values exactly.
"""

import csv
import json
import subprocess
import sys

import pytest

from presim_figures.curves import build_figure as build_curves
from presim_figures.spec import FigureSpec
from presim_figures.survival import build_figure as build_survival

RUNS = "10"  # chart-shape fidelity, not statistical power


def run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "presim", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("figures-acceptance")


def sweep_csv(workdir, name, scenario, grid):
    spath = workdir / f"{name}-scenario.json"
    spath.write_text(json.dumps(scenario))
    out = workdir / f"{name}.csv"
    run_cli("sweep", "--scenario", str(spath), "--grid", json.dumps(grid),
            "--runs", RUNS, "--seed", "99", "--out", str(out))
    return out


def test_loss_curvess_from_replication_sweep(workdir):
    # copies x sector half-life grid, like the audited-vs-unaudited figures
    out = sweep_csv(
        workdir, "fig3",
        {
            "documents": {"count": 500, "size": {"constant": 500 * 2**20}},
            "copies": 1,
            "sector": {"half_life": "50 Mh"},
            "horizon": "10 my",
        },
        {"copies": [1, 3], "sector.half_life": ["20 Mh", "100 Mh", "1000 Mh"]},
    )
    rows = read_csv(out)
    spec = FigureSpec(input_csv=str(out), x_column="sector_half_life",
                      y_column="mean_lost_fraction", series_column="copies",
                      shade=(1e8, 1e9), output=str(workdir / "fig3.png"))
    fig, ax = build_curves(spec)
    fig.savefig(spec.output)
    assert (workdir / "fig3.png").stat().st_size > 0
    for line, copies in zip(ax.lines, ("1", "3")):
        want = [(float(r["sector_half_life"]), float(r["mean_lost_fraction"]))
                for r in rows if r["copies"] == copies]
        assert list(zip(line.get_xdata(), line.get_ydata())) == want


def test_survival_vs_probe_cadence(workdir):
    # server half-life sweep at two probe cadences, like the lifetime figures
    out = sweep_csv(
        workdir, "fig4",
        {
            "documents": {"count": 500, "size": "1 MB"},
            "copies": 5,
            "sector": {"half_life": "immortal"},
            "server": {"half_life": "1 my"},
            "audit": {"server_probe": {"interval": "1 my", "probe_count": 3}},
            "horizon": "10 my",
        },
        {"audit.server_probe.interval": ["1 my", "0.25 my"],
         "server.half_life": ["1 my", "2 my", "4 my"]},
    )
    rows = read_csv(out)
    spec = FigureSpec(input_csv=str(out), x_column="server_half_life",
                      y_column="p_total_loss",
                      series_column="audit_server_probe_interval",
                      output=str(workdir / "fig4.png"))
    fig, ax = build_survival(spec)
    fig.savefig(spec.output)
    assert (workdir / "fig4.png").stat().st_size > 0
    assert len(ax.containers) == 2
    for container, interval in zip(ax.containers, (10000.0, 2500.0)):
        line = container[0]
        want = [1.0 - float(r["p_total_loss"])
                for r in rows if float(r["audit_server_probe_interval"]) == interval]
        assert list(line.get_ydata()) == want


def test_survival_vs_shock_halflife(workdir):
    # span-shock sweep like the correlated-failure figures
    out = sweep_csv(
        workdir, "fig6",
        {
            "documents": {"count": 500, "size": "1 MB"},
            "copies": 5,
            "sector": {"half_life": "immortal"},
            "shocks": [{"kind": "span", "arrival_half_life": "1 my", "span": 2}],
            "audit": {"server_probe": {"interval": "0.25 my", "probe_count": 3}},
            "horizon": "10 my",
        },
        {"shocks.0.arrival_half_life": ["0.5 my", "1 my", "2 my"]},
    )
    rows = read_csv(out)
    spec = FigureSpec(input_csv=str(out), x_column="shocks_0_arrival_half_life",
                      y_column="p_total_loss", output=str(workdir / "fig6.png"))
    fig, ax = build_survival(spec)
    fig.savefig(spec.output)
    assert (workdir / "fig6.png").stat().st_size > 0
    line = ax.containers[0][0]
    assert list(line.get_xdata()) == [float(r["shocks_0_arrival_half_life"]) for r in rows]
    assert list(line.get_ydata()) == [1.0 - float(r["p_total_loss"]) for r in rows]


def test_plot_scripts_run_from_command_line(workdir):
    out = sweep_csv(
        workdir, "cli",
        {
            "documents": {"count": 200, "size": "1 MB"},
            "copies": 2,
            "sector": {"half_life": "10 Mh"},
            "horizon": "5 my",
        },
        {"sector.half_life": ["10 Mh", "100 Mh"]},
    )
    img = workdir / "cli.png"
    proc = subprocess.run(
        ["plot-curves", "--csv", str(out), "--x", "sector_half_life",
         "--y", "mean_lost_fraction", "--shade-default", "--out", str(img)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert img.stat().st_size > 0
