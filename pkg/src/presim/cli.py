"""Command-line entry point.

Subcommands: run (replicated runs of one scenario), sweep (Cartesian
parameter grids), search (constrained policy selection), calc (closed-form
analytics) and preset (emit built-in scenario files). Exit codes: 0 on
success, 1 on a validation/configuration error, 2 on a runtime error.
Default worker count comes from the PRESIM_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import analytics
from .errors import ConfigurationError, SimulationLogicError
from .runner import (
    MODE_MIN_COST,
    MODE_MIN_LOSS,
    WORKERS_ENV_VAR,
    policy_search,
    render_table,
    run_replications,
    sweep,
    write_results,
)
from .scenario import load_scenario, preset_encryption_keys, preset_format_obsolescence
from .units import parse_time


def _load_grid(text: str) -> dict:
    """Grid argument: inline JSON object or @path to a JSON file."""
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        grid = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"grid is not valid JSON: {exc}") from exc
    if not isinstance(grid, dict):
        raise ConfigurationError("grid must be a JSON object of path -> value list")
    return grid


def _emit(table, args) -> None:
    if getattr(args, "out", None):
        write_results(table, args.format, args.out)
    else:
        sys.stdout.write(render_table(table, args.format))


def _add_common_run_args(p):
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--runs", type=int, default=1000, help="replications per cell")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default ${WORKERS_ENV_VAR} or 1)")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="presim",
        description="Monte-Carlo durability and cost analysis for replicated document collections",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="replicated runs of one scenario")
    _add_common_run_args(p_run)

    p_sweep = sub.add_parser("sweep", help="aggregate over a parameter grid")
    _add_common_run_args(p_sweep)
    p_sweep.add_argument("--grid", required=True,
                         help='JSON object {"path": [values...]} or @file')

    p_search = sub.add_parser("search", help="rank policies under a constraint")
    _add_common_run_args(p_search)
    p_search.add_argument("--candidates", required=True,
                          help='policy grid JSON {"path": [values...]} or @file')
    p_search.add_argument("--mode", choices=[MODE_MIN_LOSS, MODE_MIN_COST], required=True)
    p_search.add_argument("--budget", type=float, default=None,
                          help="cost ceiling for min-loss mode (inf allowed)")
    p_search.add_argument("--loss-target", type=float, default=None,
                          help="lost-fraction ceiling for min-cost mode")
    p_search.add_argument("--loss-quantile", type=float, default=None,
                          help="use this quantile of lost fraction instead of the mean")

    p_calc = sub.add_parser("calc", help="closed-form durability arithmetic")
    calc_sub = p_calc.add_subparsers(dest="calc_op", required=True)

    c = calc_sub.add_parser("p-single", help="P(single unaudited copy lost by t)")
    c.add_argument("--blocks", type=float, required=True)
    c.add_argument("--half-life", required=True, help="block half-life (e.g. '100 Mh')")
    c.add_argument("--t", required=True, help="elapsed time (e.g. '10 my')")

    c = calc_sub.add_parser("p-unaudited", help="P(all m unaudited copies lost by t)")
    c.add_argument("--copies", type=int, required=True)
    c.add_argument("--blocks", type=float, required=True)
    c.add_argument("--half-life", required=True)
    c.add_argument("--t", required=True)

    c = calc_sub.add_parser("unaudited-fraction",
                            help="expected fraction missed by with-replacement sampling")
    c.add_argument("--docs", type=int, required=True)
    c.add_argument("--draws", type=int, required=True)

    c = calc_sub.add_parser("fragility-equivalent",
                            help="equivalent fully-fragile collection (N*F, S/F, 1)")
    c.add_argument("--docs", type=int, required=True)
    c.add_argument("--blocks", type=float, required=True)
    c.add_argument("--fragility", type=float, required=True)

    c = calc_sub.add_parser("compression-benefit",
                            help="whether compression reduces expected loss (C*F' >= F)")
    c.add_argument("--ratio", type=float, required=True, help="compression ratio C")
    c.add_argument("--fragility", type=float, required=True, help="uncompressed F")
    c.add_argument("--compressed-fragility", type=float, required=True, help="F'")

    c = calc_sub.add_parser("byzantine-replicas",
                            help="replicas needed against subverted auditors plus a shock span")
    c.add_argument("--subverted", type=int, required=True)
    c.add_argument("--span", type=int, default=0)

    p_preset = sub.add_parser("preset", help="emit a built-in scenario")
    p_preset.add_argument("name", choices=["encryption-keys", "format-obsolescence"])
    p_preset.add_argument("--readers", type=int, default=5,
                          help="independent readers (format-obsolescence)")
    p_preset.add_argument("--reader-half-life", default="12 my")
    p_preset.add_argument("--probe-interval", default="1 my")
    p_preset.add_argument("--out", default=None)

    return parser


def _cmd_run(args) -> None:
    scenario = load_scenario(args.scenario)
    agg = run_replications(scenario, args.runs, args.seed, args.workers)
    _emit(agg, args)


def _cmd_sweep(args) -> None:
    scenario = load_scenario(args.scenario)
    grid = _load_grid(args.grid)
    table = sweep(scenario, grid, args.runs, args.seed, args.workers)
    _emit(table, args)


def _cmd_search(args) -> None:
    scenario = load_scenario(args.scenario)
    grid = _load_grid(args.candidates)
    result = policy_search(
        scenario,
        grid,
        mode=args.mode,
        n_runs=args.runs,
        master_seed=args.seed,
        budget=args.budget,
        loss_target=args.loss_target,
        loss_quantile=args.loss_quantile,
        workers=args.workers,
    )
    _emit(result, args)


def _cmd_calc(args) -> None:
    op = args.calc_op
    if op == "p-single":
        value = analytics.p_doc_loss_single_copy(
            args.blocks, parse_time(args.half_life, "half-life"), parse_time(args.t, "t")
        )
    elif op == "p-unaudited":
        value = analytics.p_doc_loss_unaudited(
            args.copies, args.blocks, parse_time(args.half_life, "half-life"), parse_time(args.t, "t")
        )
    elif op == "unaudited-fraction":
        value = analytics.expected_unaudited_fraction(args.docs, args.draws)
    elif op == "fragility-equivalent":
        eq = analytics.fragility_equivalent(args.docs, args.blocks, args.fragility)
        print(json.dumps({
            "doc_count": eq.doc_count,
            "size_blocks": eq.size_blocks,
            "fragility": eq.fragility,
            "exact": eq.exact,
        }))
        return
    elif op == "compression-benefit":
        value = analytics.compression_reduces_loss(
            args.ratio, args.fragility, args.compressed_fragility
        )
        print("true" if value else "false")
        return
    elif op == "byzantine-replicas":
        print(analytics.byzantine_min_replicas(args.subverted, args.span))
        return
    else:  # pragma: no cover - argparse forbids this
        raise ConfigurationError(f"unknown calc op {op!r}")
    print(f"{value:.17e}")


def _cmd_preset(args) -> None:
    if args.name == "encryption-keys":
        scenario = preset_encryption_keys()
    else:
        scenario = preset_format_obsolescence(
            args.readers,
            reader_half_life=parse_time(args.reader_half_life, "reader-half-life"),
            probe_interval=parse_time(args.probe_interval, "probe-interval"),
        )
    text = scenario.to_json() + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "search": _cmd_search,
    "calc": _cmd_calc,
    "preset": _cmd_preset,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SimulationLogicError, RuntimeError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
