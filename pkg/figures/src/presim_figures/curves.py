"""Loss-fraction curves: one line per policy over a swept half-life."""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .spec import DEFAULT_SHADE, FigureError, FigureSpec, extract_series


def build_figure(spec: FigureSpec):
    """Render the chart for a spec; returns (figure, axes) for inspection."""
    series, _ = extract_series(spec)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for s in series:
        ax.plot(s.x, s.y, marker="o", label=s.label or spec.y_column)
    if spec.log_x:
        ax.set_xscale("log")
    if spec.shade is not None:
        ax.axvspan(spec.shade[0], spec.shade[1], alpha=0.15, color="grey",
                   label="plausible region")
    ax.set_xlabel(spec.x_column)
    ax.set_ylabel(spec.y_column)
    if spec.title:
        ax.set_title(spec.title)
    if spec.series_column is not None or spec.shade is not None:
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
        prog="plot-curves",
        description="plot loss-fraction curves from runner CSV output",
    )
    parser.add_argument("--csv", required=True, help="runner CSV file")
    parser.add_argument("--x", required=True, help="x column (swept parameter)")
    parser.add_argument("--y", default="mean_lost_fraction", help="y column")
    parser.add_argument("--series", default=None, help="column keying one line per value")
    parser.add_argument("--linear-x", action="store_true", help="disable log x axis")
    parser.add_argument("--shade", nargs=2, type=float, metavar=("LO", "HI"),
                        default=None, help="shaded x band (defaults off; "
                        f"--shade-default uses {DEFAULT_SHADE})")
    parser.add_argument("--shade-default", action="store_true",
                        help="shade the default plausible half-life region")
    parser.add_argument("--title", default="")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    shade = tuple(args.shade) if args.shade else (DEFAULT_SHADE if args.shade_default else None)
    return FigureSpec(
        input_csv=args.csv,
        x_column=args.x,
        y_column=args.y,
        series_column=args.series,
        log_x=not args.linear_x,
        shade=shade,
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
