"""Survival charts: 1 - p(total loss) per policy, with CI whiskers."""

from __future__ import annotations

import argparse
import sys
import warnings

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .spec import FigureError, FigureSpec, extract_series


def build_figure(spec: FigureSpec):
    """Render survival (1 - y) curves; whiskers from the CI columns.

    When the CI columns are absent the whiskers are omitted with a warning
    rather than failing.
    """
    series, have_ci = extract_series(spec, want_ci=True)
    if not have_ci:
        warnings.warn("CI columns absent; plotting survival without whiskers")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for s in series:
        survival = [1.0 - y for y in s.y]
        if have_ci:
            lower = [(1.0 - y) - (1.0 - hi) for y, hi in zip(s.y, s.ci_hi)]
            upper = [(1.0 - lo) - (1.0 - y) for y, lo in zip(s.y, s.ci_lo)]
            ax.errorbar(s.x, survival, yerr=[lower, upper], marker="o",
                        capsize=3, label=s.label or "survival")
        else:
            ax.plot(s.x, survival, marker="o", label=s.label or "survival")
    if spec.log_x:
        ax.set_xscale("log")
    if spec.shade is not None:
        ax.axvspan(spec.shade[0], spec.shade[1], alpha=0.15, color="grey")
    ax.set_xlabel(spec.x_column)
    ax.set_ylabel(f"1 - {spec.y_column}")
    ax.set_ylim(-0.02, 1.02)
    if spec.title:
        ax.set_title(spec.title)
    if spec.series_column is not None:
        ax.legend()
    fig.tight_layout()
    return fig, ax


def render(spec: FigureSpec) -> str:
    fig, _ = build_figure(spec)
    fig.savefig(spec.output)
    plt.close(fig)
    return spec.output


def parse_args(argv=None) -> FigureSpec:
    parser = argparse.ArgumentParser(
        prog="plot-survival",
        description="plot survival probability (1 - p_total_loss) from runner CSV output",
    )
    parser.add_argument("--csv", required=True)
    parser.add_argument("--x", required=True)
    parser.add_argument("--y", default="p_total_loss",
                        help="loss-probability column (plotted as 1 - value)")
    parser.add_argument("--series", default=None)
    parser.add_argument("--linear-x", action="store_true")
    parser.add_argument("--title", default="")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    return FigureSpec(
        input_csv=args.csv,
        x_column=args.x,
        y_column=args.y,
        series_column=args.series,
        log_x=not args.linear_x,
        output=args.out,
        title=args.title,
    )


def main(argv=None) -> int:
    try:
        path = render(parse_args(argv))
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
