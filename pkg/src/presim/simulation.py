"""One simulated world: wiring the risk processes and policies to the engine.

Copy corruption is modeled at copy granularity, one exponential clock per
live valid copy. For speed those clocks are kept in per-server arrays and
realized in vectorized sweeps at each structural event (audit, probe,
failure, glitch, shock, activation, horizon) instead of one queue entry
each; by superposition and memorylessness the two are equivalent draw for
draw, and exact corruption timestamps are preserved for loss records and
storage billing. Rate changes (glitches, shocks) resample the affected
clocks; stale server-failure events are tombstoned by an epoch counter.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .engine import (
    CopyCorruption,
    DocumentAudit,
    GlitchEnd,
    GlitchStart,
    Horizon,
    ServerActivation,
    ServerFailure,
    ServerProbe,
    ShockRateEnd,
    ShockRateStart,
    ShockSpan,
    create_engine,
    draw_exponential,
    draw_exponential_batch,
)
from .costs import CostLedger
from .risks import (
    RateShock,
    SpanShock,
    apply_span_shock,
    effective_server_hazard,
    resample_on_rate_change,
)
from .state import (
    CollectionState,
    LossReport,
    activate_replacement,
    audit_documents,
    build_segments,
    loss_metrics,
    probe_all_servers,
    replace_server,
)

# Stream ids: one independent random stream per stochastic concern, so
# paired runs that share a seed keep common draws where scenarios agree.
STREAM_DOC_SIZES = 0
STREAM_CORRUPTION = 1
STREAM_SERVER_LIFE = 2
STREAM_GLITCH = 3
STREAM_SHOCK_ARRIVAL = 4
STREAM_SHOCK_TARGETS = 5
STREAM_AUDIT = 6
STREAM_PROBE = 7


@dataclass
class SimOutcome:
    loss: LossReport
    ledger: CostLedger
    event_counts: dict
    trace: object | None
    audit_events: int
    repairs: int


class Simulation:
    """Builds and runs one world; single-threaded, owned by one run."""

    def __init__(self, scenario, seed: int, collect_trace: bool = False, trace_limit=None, itemize_costs: bool = False):
        self.scenario = scenario
        self.collect_trace = collect_trace
        self.trace_limit = trace_limit
        self.engine = create_engine(seed, scenario.horizon)
        self.counts = Counter()
        self.total_repairs = 0

        sizes = scenario.documents.realize(self.engine.stream(STREAM_DOC_SIZES))
        blocks = scenario.sector.blocks_for(sizes)
        self.block_hazard = scenario.sector.block_hazard
        self.copy_rates = blocks.astype(np.float64) * self.block_hazard
        self.has_sector = self.block_hazard > 0.0

        ledger = CostLedger(scenario.tariff, itemize=itemize_costs)
        self.state = CollectionState(sizes, scenario.target_copies, ledger)
        self.all_scope_multiplier = 1.0
        self.active_rate_targets: dict[int, list[int]] = {}
        self._segments = None

        for srv in self.state.servers:
            self._draw_copy_clocks(srv, srv.valid, 0.0)
            self._schedule_failure(srv, 0.0)
            self._spawn_glitch_channels(srv, 0.0)

        for idx, shock in enumerate(scenario.shocks):
            kind = ShockSpan(idx) if isinstance(shock, SpanShock) else ShockRateStart(idx)
            self._schedule_arrival(kind, shock.arrival_hazard, 0.0)

        doc_audit = scenario.audit.doc_audit
        if doc_audit is not None:
            first = doc_audit.cycle / doc_audit.segments
            self.engine.schedule(first, DocumentAudit(segment_index=0, cycle_index=0))
        probe = scenario.audit.server_probe
        if probe is not None:
            self.engine.schedule(probe.interval, ServerProbe())

    # -- random-process plumbing --------------------------------------------

    def _draw_copy_clocks(self, srv, docs, now: float) -> None:
        """(Re)sample absolute corruption times for the given valid copies.

        `docs` is a boolean mask or an index array over the collection.
        """
        if not self.has_sector:
            return
        ids = np.flatnonzero(docs) if docs.dtype == bool else docs
        if len(ids) == 0:
            return
        rates = self.copy_rates[ids] * srv.glitch_multiplier
        draws = draw_exponential_batch(self.engine.stream(STREAM_CORRUPTION), rates)
        srv.corr_time[ids] = now + draws

    def _schedule_failure(self, srv, now: float) -> None:
        """Draw a fresh failure time at the server's current effective rate."""
        model = self.scenario.server
        if model is None:
            srv.pending_fail = np.inf
            return
        hazard = effective_server_hazard(model, srv.shock_multiplier)
        if srv.pending_fail == np.inf or srv.pending_fail >= now:
            at = resample_on_rate_change(srv.pending_fail, now, hazard, self.engine.stream(STREAM_SERVER_LIFE))
        else:
            at = now + draw_exponential(self.engine.stream(STREAM_SERVER_LIFE), hazard)
        srv.pending_fail = at
        srv.fail_epoch += 1
        if at <= self.engine.clock.horizon:
            self.engine.schedule(at, ServerFailure(srv.id, srv.fail_epoch))

    def _spawn_glitch_channels(self, srv, now: float) -> None:
        for channel, model in enumerate(self.scenario.glitches):
            at = now + draw_exponential(self.engine.stream(STREAM_GLITCH), model.arrival_hazard)
            if at <= self.engine.clock.horizon:
                self.engine.schedule(at, GlitchStart(srv.id, channel))

    def _schedule_arrival(self, event, hazard: float, now: float) -> None:
        at = now + draw_exponential(self.engine.stream(STREAM_SHOCK_ARRIVAL), hazard)
        if at <= self.engine.clock.horizon:
            self.engine.schedule(at, event)

    # -- corruption sweep -----------------------------------------------------

    def _advance_corruption(self, to_time: float) -> None:
        """Realize every copy-corruption clock that has expired by to_time.

        Flips the copies, records exact-time losses where a document's last
        valid copy died, and bills the stepwise storage-level drop.
        """
        if not self.has_sector:
            return
        state = self.state
        newly = None
        last_death = None
        for srv in state.servers:
            if not srv.alive:
                continue
            due = srv.valid & (srv.corr_time <= to_time)
            k = int(due.sum())
            if k == 0:
                continue
            times = srv.corr_time[due]
            sizes = state.doc_sizes[due].astype(np.float64)
            order = np.argsort(times, kind="stable")
            t_sorted = times[order]
            boundaries = np.concatenate(([srv.bill_from], t_sorted, [to_time]))
            levels = srv.stored_bytes - np.concatenate(([0.0], np.cumsum(sizes[order])))
            state.ledger.accrue_storage_steps(levels, np.diff(boundaries))
            srv.bill_from = to_time

            contrib = np.where(due, srv.corr_time, -np.inf)
            srv.valid[due] = False
            srv.corr_time[due] = np.inf
            srv.stored_bytes -= int(state.doc_sizes[due].sum())
            self.counts["CopyCorruption"] += k
            flips = due.view(np.int8)
            newly = flips.astype(np.int32) if newly is None else newly + flips
            last_death = contrib if last_death is None else np.maximum(last_death, contrib)
        if newly is None:
            return
        state.valid_count -= newly
        lost_now = (state.valid_count == 0) & (newly > 0) & np.isnan(state.lost_time)
        state.record_losses(lost_now, last_death)

    # -- handlers -------------------------------------------------------------

    def handlers(self) -> dict:
        return {
            CopyCorruption: self._on_copy_corruption,
            GlitchStart: self._on_glitch_start,
            GlitchEnd: self._on_glitch_end,
            ServerFailure: self._on_server_failure,
            ShockRateStart: self._on_rate_shock_start,
            ShockRateEnd: self._on_rate_shock_end,
            ShockSpan: self._on_span_shock,
            DocumentAudit: self._on_document_audit,
            ServerProbe: self._on_probe,
            ServerActivation: self._on_activation,
            Horizon: self._on_horizon,
        }

    def _on_copy_corruption(self, now, event):
        # Corruption is normally swept in batches; an explicitly scheduled
        # event is honored for completeness and ignored if stale.
        self.state.mark_copy_corrupt(event.server_id, event.doc_id, now)

    def _on_glitch_start(self, now, event):
        self._advance_corruption(now)
        self.counts["GlitchStart"] += 1
        srv = self.state.servers[event.server_id]
        if not srv.alive:
            return
        model = self.scenario.glitches[event.channel]
        srv.glitch_multiplier *= model.multiplier
        self._draw_copy_clocks(srv, srv.valid, now)
        if np.isfinite(model.duration):
            self.engine.schedule(now + model.duration, GlitchEnd(srv.id, event.channel))

    def _on_glitch_end(self, now, event):
        self._advance_corruption(now)
        self.counts["GlitchEnd"] += 1
        srv = self.state.servers[event.server_id]
        if not srv.alive:
            return
        model = self.scenario.glitches[event.channel]
        srv.glitch_multiplier /= model.multiplier
        self._draw_copy_clocks(srv, srv.valid, now)
        at = now + draw_exponential(self.engine.stream(STREAM_GLITCH), model.arrival_hazard)
        if at <= self.engine.clock.horizon:
            self.engine.schedule(at, GlitchStart(srv.id, event.channel))

    def _on_server_failure(self, now, event):
        self._advance_corruption(now)
        srv = self.state.servers[event.server_id]
        if not srv.alive or event.epoch != srv.fail_epoch:
            return
        self.counts["ServerFailure"] += 1
        self.state.kill_server(srv.id, now)

    def _on_rate_shock_start(self, now, event):
        self._advance_corruption(now)
        self.counts["ShockRateStart"] += 1
        shock: RateShock = self.scenario.shocks[event.shock_index]
        live = self.state.live_servers()
        if shock.scope_size is None:
            self.all_scope_multiplier *= shock.multiplier
            targets = live
        else:
            k = min(shock.scope_size, len(live))
            gen = self.engine.stream(STREAM_SHOCK_TARGETS).generator
            picked = sorted(gen.choice(len(live), size=k, replace=False)) if live else []
            targets = [live[i] for i in picked]
            self.active_rate_targets[event.shock_index] = [s.id for s in targets]
        for srv in targets:
            srv.shock_multiplier *= shock.multiplier
            self._schedule_failure(srv, now)
        if np.isfinite(shock.duration):
            self.engine.schedule(now + shock.duration, ShockRateEnd(event.shock_index))

    def _on_rate_shock_end(self, now, event):
        self._advance_corruption(now)
        self.counts["ShockRateEnd"] += 1
        shock: RateShock = self.scenario.shocks[event.shock_index]
        if shock.scope_size is None:
            self.all_scope_multiplier /= shock.multiplier
            targets = self.state.live_servers()
        else:
            ids = self.active_rate_targets.pop(event.shock_index, [])
            targets = [self.state.servers[i] for i in ids if self.state.servers[i].alive]
        for srv in targets:
            srv.shock_multiplier /= shock.multiplier
            self._schedule_failure(srv, now)
        self._schedule_arrival(ShockRateStart(event.shock_index), shock.arrival_hazard, now)

    def _on_span_shock(self, now, event):
        self._advance_corruption(now)
        self.counts["ShockSpan"] += 1
        shock: SpanShock = self.scenario.shocks[event.shock_index]
        victims = apply_span_shock(
            [s.id for s in self.state.live_servers()],
            shock.span,
            self.engine.stream(STREAM_SHOCK_TARGETS),
        )
        for sid in victims:
            self.state.kill_server(sid, now)
        self._schedule_arrival(ShockSpan(event.shock_index), shock.arrival_hazard, now)

    def _on_document_audit(self, now, event):
        self._advance_corruption(now)
        self.counts["DocumentAudit"] += 1
        policy = self.scenario.audit.doc_audit
        if event.segment_index == 0:
            self._segments = build_segments(
                self.state.n_docs,
                policy.segments,
                policy.strategy,
                event.cycle_index,
                self.engine.stream(STREAM_AUDIT),
            )
        report = audit_documents(self.state, self._segments[event.segment_index], now, policy.fixity)
        self.total_repairs += report.repair_count
        for sid, ids in report.repairs:
            self._draw_copy_clocks(self.state.servers[sid], ids, now)
        for dead_id in report.dead_servers:
            self._detect_dead(dead_id, now)
        if event.segment_index + 1 < policy.segments:
            nxt = DocumentAudit(event.segment_index + 1, event.cycle_index)
        else:
            nxt = DocumentAudit(0, event.cycle_index + 1)
        at = policy.cycle * (nxt.cycle_index + (nxt.segment_index + 1) / policy.segments)
        self.engine.schedule(max(at, now), nxt)

    def _on_probe(self, now, event):
        self._advance_corruption(now)
        self.counts["ServerProbe"] += 1
        policy = self.scenario.audit.server_probe
        dead = probe_all_servers(self.state, policy.probe_count, now, self.engine.stream(STREAM_PROBE))
        for dead_id in dead:
            self._detect_dead(dead_id, now)
        self.engine.schedule(now + policy.interval, ServerProbe())

    def _detect_dead(self, dead_id: int, now: float) -> None:
        srv = self.state.servers[dead_id]
        if srv.pending_replacement or srv.retired:
            return
        at = replace_server(self.state, dead_id, now, self.scenario.repair)
        if at is not None:
            self.engine.schedule(at, ServerActivation(dead_id))

    def _on_activation(self, now, event):
        self._advance_corruption(now)
        self.counts["ServerActivation"] += 1
        new = activate_replacement(self.state, event.replaced_id, now)
        if new is None:
            return
        new.shock_multiplier = self.all_scope_multiplier
        self._draw_copy_clocks(new, new.valid, now)
        self._schedule_failure(new, now)
        self._spawn_glitch_channels(new, now)

    def _on_horizon(self, now, event):
        self._advance_corruption(now)
        self.counts["Horizon"] += 1
        for srv in self.state.servers:
            self.state.bill_server(srv, now)

    # -- entry ------------------------------------------------------------------

    def run(self) -> SimOutcome:
        trace = self.engine.run(
            self.handlers(), collect_trace=self.collect_trace, trace_limit=self.trace_limit
        )
        report = loss_metrics(self.state, self.scenario.horizon)
        return SimOutcome(
            loss=report,
            ledger=self.state.ledger,
            event_counts=dict(self.counts),
            trace=trace if self.collect_trace else None,
            audit_events=self.counts.get("DocumentAudit", 0),
            repairs=self.total_repairs,
        )
