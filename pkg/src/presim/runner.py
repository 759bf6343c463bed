"""Replicated runs, sweeps, policy search and deterministic result output.

Reproducibility contract: run i of a batch uses the 64-bit seed derived as
the first uint64 of numpy's SeedSequence(master_seed, spawn_key=(i,)), so
any single run can be reproduced from (master_seed, i) alone. Results are a
deterministic function of (scenario, master_seed, n_runs): worker count and
scheduling never change a byte of output, because runs are folded in run
order. Every sweep/search cell reuses the same master seed, giving paired
(common-random-number) comparisons across cells.
"""

from __future__ import annotations

import copy
import csv
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .errors import ConfigurationError, ValidationError
from .scenario import Scenario, parse_scenario_dict
from .simulation import Simulation

WORKERS_ENV_VAR = "PRESIM_WORKERS"

STAT_COLUMNS = [
    "run_count",
    "mean_lost_fraction",
    "sd_lost_fraction",
    "q50",
    "q95",
    "q99",
    "p_total_loss",
    "p_total_loss_ci_lo",
    "p_total_loss_ci_hi",
    "mean_cost_storage",
    "mean_cost_ingress",
    "mean_cost_egress",
]


def derive_run_seed(master_seed: int, run_index: int) -> int:
    """Stable 64-bit per-run seed from (master_seed, run_index)."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(run_index,))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class RunResult:
    """Loss and cost metrics of a single simulated run."""

    seed: int
    doc_count: int
    lost_count: int
    lost_fraction: float
    first_loss_time: float | None
    total_collection_loss: bool
    cost_storage: float
    cost_ingress: float
    cost_egress: float
    byte_months: float
    ingress_bytes: int
    egress_bytes: int
    event_counts: dict
    trace: object | None = None

    @property
    def cost_total(self) -> float:
        return self.cost_storage + self.cost_ingress + self.cost_egress


def run_once(scenario: Scenario, seed: int, collect_trace: bool = False, itemize_costs: bool = False) -> RunResult:
    """Simulate one world to the horizon and report its metrics."""
    sim = Simulation(scenario, seed, collect_trace=collect_trace, itemize_costs=itemize_costs)
    out = sim.run()
    result = RunResult(
        seed=seed,
        doc_count=out.loss.doc_count,
        lost_count=out.loss.lost_count,
        lost_fraction=out.loss.lost_fraction,
        first_loss_time=out.loss.first_loss_time,
        total_collection_loss=out.loss.total_collection_loss,
        cost_storage=out.ledger.storage_cost,
        cost_ingress=out.ledger.ingress_cost,
        cost_egress=out.ledger.egress_cost,
        byte_months=out.ledger.byte_months,
        ingress_bytes=out.ledger.ingress_bytes,
        egress_bytes=out.ledger.egress_bytes,
        event_counts=out.event_counts,
        trace=out.trace,
    )
    if itemize_costs:
        result.journal = out.ledger.journal
    return result


@dataclass
class Aggregate:
    """Cross-run distribution summary; merging two aggregates is exact.

    Per-run vectors are retained (in run order) so that quantiles and other
    statistics of a merge equal those of one big batch.
    """

    lost_fractions: np.ndarray
    total_loss_flags: np.ndarray
    costs_storage: np.ndarray
    costs_ingress: np.ndarray
    costs_egress: np.ndarray

    @classmethod
    def from_results(cls, results) -> "Aggregate":
        return cls(
            lost_fractions=np.array([r.lost_fraction for r in results], dtype=np.float64),
            total_loss_flags=np.array([r.total_collection_loss for r in results], dtype=bool),
            costs_storage=np.array([r.cost_storage for r in results], dtype=np.float64),
            costs_ingress=np.array([r.cost_ingress for r in results], dtype=np.float64),
            costs_egress=np.array([r.cost_egress for r in results], dtype=np.float64),
        )

    def merge(self, other: "Aggregate") -> "Aggregate":
        return Aggregate(
            lost_fractions=np.concatenate([self.lost_fractions, other.lost_fractions]),
            total_loss_flags=np.concatenate([self.total_loss_flags, other.total_loss_flags]),
            costs_storage=np.concatenate([self.costs_storage, other.costs_storage]),
            costs_ingress=np.concatenate([self.costs_ingress, other.costs_ingress]),
            costs_egress=np.concatenate([self.costs_egress, other.costs_egress]),
        )

    @property
    def run_count(self) -> int:
        return len(self.lost_fractions)

    @property
    def mean_lost_fraction(self) -> float:
        return float(self.lost_fractions.mean())

    @property
    def sd_lost_fraction(self) -> float:
        return float(self.lost_fractions.std(ddof=0))

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.lost_fractions, q))

    @property
    def p_total_loss(self) -> float:
        return float(self.total_loss_flags.mean())

    def total_loss_ci(self, confidence: float = 0.95) -> tuple[float, float]:
        """Wilson score interval for the total-loss probability."""
        k = int(self.total_loss_flags.sum())
        n = self.run_count
        ci = binomtest(k, n).proportion_ci(confidence_level=confidence, method="wilson")
        return float(ci.low), float(ci.high)

    @property
    def mean_cost_storage(self) -> float:
        return float(self.costs_storage.mean())

    @property
    def mean_cost_ingress(self) -> float:
        return float(self.costs_ingress.mean())

    @property
    def mean_cost_egress(self) -> float:
        return float(self.costs_egress.mean())

    @property
    def mean_cost_total(self) -> float:
        return self.mean_cost_storage + self.mean_cost_ingress + self.mean_cost_egress

    def stat_row(self) -> dict:
        ci_lo, ci_hi = self.total_loss_ci()
        return {
            "run_count": self.run_count,
            "mean_lost_fraction": self.mean_lost_fraction,
            "sd_lost_fraction": self.sd_lost_fraction,
            "q50": self.quantile(0.50),
            "q95": self.quantile(0.95),
            "q99": self.quantile(0.99),
            "p_total_loss": self.p_total_loss,
            "p_total_loss_ci_lo": ci_lo,
            "p_total_loss_ci_hi": ci_hi,
            "mean_cost_storage": self.mean_cost_storage,
            "mean_cost_ingress": self.mean_cost_ingress,
            "mean_cost_egress": self.mean_cost_egress,
        }


def _run_indexed(args):
    scenario, master_seed, index = args
    seed = derive_run_seed(master_seed, index)
    try:
        return run_once(scenario, seed)
    except Exception as exc:
        raise RuntimeError(f"run {index} (seed {seed}) failed: {exc}") from exc


def resolve_workers(workers=None) -> int:
    if workers is None:
        workers = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        workers = int(workers)
    except (TypeError, ValueError):
        raise ConfigurationError(f"workers must be an integer, got {workers!r}") from None
    if workers < 1:
        raise ConfigurationError(f"workers must be >= 1, got {workers}")
    return workers


def run_replications(scenario: Scenario, n_runs: int, master_seed: int, workers=None) -> Aggregate:
    """Run n_runs independent replications and fold them in run order.

    The fold is an order-fixed reduction over run index, so the aggregate is
    identical for any worker count.
    """
    if n_runs < 1:
        raise ConfigurationError(f"n_runs must be >= 1, got {n_runs}")
    workers = resolve_workers(workers)
    tasks = [(scenario, master_seed, i) for i in range(n_runs)]
    if workers == 1 or n_runs == 1:
        results = [_run_indexed(t) for t in tasks]
    else:
        chunk = max(1, n_runs // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_indexed, tasks, chunksize=chunk))
    return Aggregate.from_results(results)


# ---------------------------------------------------------------------------
# Parameter paths and sweeps


def _walk_path(doc, path: str):
    """Yield (container, key) for the last segment of a dotted path."""
    parts = path.split(".")
    node = doc
    for i, part in enumerate(parts[:-1]):
        node = _step(node, part, ".".join(parts[: i + 1]), path)
    return node, parts[-1]


def _step(node, part, sofar, path):
    if isinstance(node, list):
        try:
            index = int(part)
        except ValueError:
            raise ValidationError(path, f"{sofar!r} indexes a list; expected an integer") from None
        if not 0 <= index < len(node):
            raise ValidationError(path, f"list index {index} out of range at {sofar!r}")
        return node[index]
    if isinstance(node, dict):
        if part not in node:
            raise ValidationError(path, f"unknown scenario field {sofar!r}")
        return node[part]
    raise ValidationError(path, f"{sofar!r} is a leaf; cannot descend further")


def set_scenario_path(doc: dict, path: str, value) -> None:
    container, last = _walk_path(doc, path)
    if isinstance(container, list):
        try:
            index = int(last)
        except ValueError:
            raise ValidationError(path, "list index expected") from None
        if not 0 <= index < len(container):
            raise ValidationError(path, f"list index {index} out of range")
        container[index] = value
    else:
        if not isinstance(container, dict) or last not in container:
            raise ValidationError(path, f"unknown scenario field {path!r}")
        container[last] = value


def get_scenario_path(doc: dict, path: str):
    container, last = _walk_path(doc, path)
    return _step(container, last, path, path)


def column_name(path: str) -> str:
    return path.replace(".", "_")


@dataclass
class ResultTable:
    """Ordered rows with a fixed column list; the unit of CSV/JSON output."""

    columns: list
    rows: list = field(default_factory=list)


def _scenario_cells(base: Scenario, grid: dict):
    """Yield (swept-values dict, Scenario) over the grid's Cartesian product."""
    base_doc = base.to_dict()
    paths = list(grid.keys())
    for path in paths:
        get_scenario_path(base_doc, path)  # fail fast on bad paths
        if not isinstance(grid[path], (list, tuple)) or len(grid[path]) == 0:
            raise ValidationError(path, "grid values must be a non-empty list")
    for combo in itertools.product(*(grid[p] for p in paths)):
        doc = copy.deepcopy(base_doc)
        for path, value in zip(paths, combo):
            set_scenario_path(doc, path, value)
        scenario = parse_scenario_dict(doc)
        normalized = scenario.to_dict()
        keys = {column_name(p): get_scenario_path(normalized, p) for p in paths}
        yield keys, scenario


def sweep(base: Scenario, grid: dict, n_runs: int, master_seed: int, workers=None) -> ResultTable:
    """Aggregate one batch per grid cell, rows in lexicographic grid order.

    Every cell runs with the same master seed, so comparisons across cells
    are paired by run index (common random numbers).
    """
    key_columns = [column_name(p) for p in grid.keys()]
    table = ResultTable(columns=key_columns + STAT_COLUMNS)
    for keys, scenario in _scenario_cells(base, grid):
        agg = run_replications(scenario, n_runs, master_seed, workers)
        row = dict(keys)
        row.update(agg.stat_row())
        table.rows.append(row)
    return table


# ---------------------------------------------------------------------------
# Policy search


MODE_MIN_LOSS = "min-loss"
MODE_MIN_COST = "min-cost"


@dataclass
class SearchResult:
    mode: str
    feasible: bool
    selected: dict
    table: ResultTable

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "feasible": self.feasible,
            "selected": self.selected,
            "columns": self.table.columns,
            "candidates": self.table.rows,
        }


def _audit_rate(scenario: Scenario) -> float:
    """Audit touches per hour; used for the 'least frequent auditing' tie-break."""
    rate = 0.0
    doc_audit = scenario.audit.doc_audit
    if doc_audit is not None:
        rate += doc_audit.segments / doc_audit.cycle
    probe = scenario.audit.server_probe
    if probe is not None:
        rate += 1.0 / probe.interval
    return rate


def policy_search(
    base: Scenario,
    candidates: dict,
    mode: str,
    n_runs: int,
    master_seed: int,
    budget: float | None = None,
    loss_target: float | None = None,
    loss_quantile: float | None = None,
    workers=None,
) -> SearchResult:
    """Evaluate a policy grid under a constraint and rank the feasible ones.

    mode "min-loss" minimizes expected loss subject to mean total cost <=
    budget; mode "min-cost" minimizes mean total cost subject to expected
    loss <= loss_target. The loss statistic is the mean lost fraction, or
    the given quantile of it when loss_quantile is set (a risk-tolerance
    constraint). Ties break toward lower cost, then fewer copies, then less
    frequent auditing. When nothing is feasible the result carries the
    best-effort candidate (closest to the constraint) and feasible=False.
    """
    if mode == MODE_MIN_LOSS:
        if budget is None:
            raise ConfigurationError("min-loss mode requires a budget")
    elif mode == MODE_MIN_COST:
        if loss_target is None:
            raise ConfigurationError("min-cost mode requires a loss target")
    else:
        raise ConfigurationError(f"unknown search mode {mode!r}")

    key_columns = [column_name(p) for p in candidates.keys()]
    columns = key_columns + STAT_COLUMNS + ["mean_cost_total", "loss_statistic", "feasible", "selected"]
    rows = []
    measures = []
    for keys, scenario in _scenario_cells(base, candidates):
        agg = run_replications(scenario, n_runs, master_seed, workers)
        loss_stat = (
            agg.mean_lost_fraction if loss_quantile is None else agg.quantile(loss_quantile)
        )
        cost = agg.mean_cost_total
        feasible = cost <= budget if mode == MODE_MIN_LOSS else loss_stat <= loss_target
        row = dict(keys)
        row.update(agg.stat_row())
        row["mean_cost_total"] = cost
        row["loss_statistic"] = loss_stat
        row["feasible"] = int(feasible)
        row["selected"] = 0
        rows.append(row)
        objective = loss_stat if mode == MODE_MIN_LOSS else cost
        measures.append(
            {
                "objective": objective,
                "cost": cost,
                "loss": loss_stat,
                "copies": scenario.target_copies,
                "audit_rate": _audit_rate(scenario),
                "feasible": feasible,
            }
        )

    order = sorted(
        range(len(rows)),
        key=lambda i: (
            measures[i]["objective"],
            measures[i]["cost"],
            measures[i]["copies"],
            measures[i]["audit_rate"],
        ),
    )
    feasible_order = [i for i in order if measures[i]["feasible"]]
    if feasible_order:
        best = feasible_order[0]
        feasible = True
    else:
        # Best effort: the candidate closest to satisfying the constraint.
        constraint = "cost" if mode == MODE_MIN_LOSS else "loss"
        best = min(range(len(rows)), key=lambda i: (measures[i][constraint], i))
        feasible = False
    rows[best]["selected"] = 1
    table = ResultTable(columns=columns, rows=rows)
    return SearchResult(mode=mode, feasible=feasible, selected=rows[best], table=table)


# ---------------------------------------------------------------------------
# Output


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17e}"
    return str(value)


def _jsonable(value):
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def render_table(table, fmt: str) -> str:
    """Render a ResultTable (or one Aggregate) to CSV or JSON text.

    Integer-valued columns print as integers (exact); floats print in full
    precision scientific notation, so identical inputs render byte-identical
    files and JSON round-trips losslessly.
    """
    if isinstance(table, Aggregate):
        table = ResultTable(columns=list(STAT_COLUMNS), rows=[table.stat_row()])
    if isinstance(table, SearchResult):
        if fmt == "json":
            doc = table.to_dict()
            doc["selected"] = {k: _jsonable(v) for k, v in doc["selected"].items()}
            doc["candidates"] = [
                {k: _jsonable(v) for k, v in row.items()} for row in doc["candidates"]
            ]
            return json.dumps(doc, indent=2) + "\n"
        table = table.table
    if fmt == "csv":
        import io

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_format_cell(row.get(c)) for c in table.columns])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "columns": table.columns,
            "rows": [{k: _jsonable(v) for k, v in row.items()} for row in table.rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    raise ConfigurationError(f"unknown output format {fmt!r}")


def write_results(table, fmt: str, path) -> None:
    """Write a table (or Aggregate, or SearchResult) to path as CSV or JSON."""
    text = render_table(table, fmt)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise RuntimeError(f"cannot write results to {path}: {exc}") from exc
