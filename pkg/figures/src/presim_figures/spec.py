"""Figure descriptions and the CSV layer they render from.

These scripts are display-only: they never recompute statistics, they plot
exactly the values found in the CSV (survival charts apply the fixed
1 - p transform and whisker arithmetic the chart is defined by). The CSV
layout is the runner's: swept-parameter key columns followed by the fixed
statistics columns, floats in scientific notation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field


class FigureError(ValueError):
    """Bad figure description or CSV that cannot back it."""


# Default shaded band: the plausible block half-life region, in hours.
DEFAULT_SHADE = (100e6, 1000e6)

CI_LO = "p_total_loss_ci_lo"
CI_HI = "p_total_loss_ci_hi"


@dataclass(frozen=True)
class FigureSpec:
    """One chart: which CSV, which columns, how to dress the axes."""

    input_csv: str
    x_column: str
    y_column: str
    series_column: str | None = None
    log_x: bool = True
    shade: tuple | None = None
    output: str = "figure.png"
    title: str = ""


@dataclass
class Series:
    label: str
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)
    ci_lo: list = field(default_factory=list)
    ci_hi: list = field(default_factory=list)


def _parse_value(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def load_rows(path: str) -> tuple[list[str], list[dict]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FigureError(f"{path}: empty CSV, nothing to plot")
        columns = list(reader.fieldnames)
        rows = [{k: _parse_value(v) for k, v in row.items()} for row in reader]
    if not rows:
        raise FigureError(f"{path}: no data rows")
    return columns, rows


def extract_series(spec: FigureSpec, want_ci: bool = False) -> tuple[list[Series], bool]:
    """Group CSV rows into plottable series, preserving row order.

    Returns the series and whether CI columns were available (only checked
    when want_ci is set; their absence degrades to whiskerless plots).
    """
    columns, rows = load_rows(spec.input_csv)
    needed = [spec.x_column, spec.y_column]
    if spec.series_column is not None:
        needed.append(spec.series_column)
    for col in needed:
        if col not in columns:
            raise FigureError(f"{spec.input_csv}: missing column {col!r}")
    have_ci = want_ci and CI_LO in columns and CI_HI in columns

    series: dict[str, Series] = {}
    for row in rows:
        key = "" if spec.series_column is None else str(row[spec.series_column])
        s = series.get(key)
        if s is None:
            label = key if spec.series_column is None else f"{spec.series_column}={key}"
            s = series[key] = Series(label=label)
        s.x.append(row[spec.x_column])
        s.y.append(row[spec.y_column])
        if have_ci:
            s.ci_lo.append(row[CI_LO])
            s.ci_hi.append(row[CI_HI])
    return list(series.values()), have_ci
