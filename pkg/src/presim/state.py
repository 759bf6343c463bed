"""Collection state and the preservation policies that act on it.

State is a ledger of document copies across servers: which copies are still
valid, which servers are alive, and when each permanently lost document
died. Policies are the active side: segmented document auditing with
repair, server liveness probing, and replacement of dead servers with
repopulated ones.

Failures are silent, so a document's permanent-loss timestamp is the
instant its last valid copy was destroyed, not the (later) audit that
discovers it. Losses are append-only: with no valid copy left there is
nothing to repair from, so a lost document can never be resurrected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .costs import CostLedger
from .errors import ConfigurationError, SimulationLogicError

SYSTEMATIC = "systematic-without-replacement"
RANDOM = "random-with-replacement"
STRATEGIES = (SYSTEMATIC, RANDOM)

FIXITY_FULL = "full"
FIXITY_HASH = "hash"


# ---------------------------------------------------------------------------
# Policy and collection descriptions


@dataclass(frozen=True)
class ConstantSize:
    bytes: int

    def __post_init__(self):
        if self.bytes <= 0:
            raise ConfigurationError("document size must be positive")

    def realize(self, count: int, rng) -> np.ndarray:
        return np.full(count, self.bytes, dtype=np.int64)


@dataclass(frozen=True)
class LogNormalSize:
    median_bytes: int
    sigma: float

    def __post_init__(self):
        if self.median_bytes <= 0:
            raise ConfigurationError("median document size must be positive")
        if self.sigma <= 0:
            raise ConfigurationError("sigma must be positive")

    def realize(self, count: int, rng) -> np.ndarray:
        gen = rng.generator if hasattr(rng, "generator") else rng
        draws = gen.standard_normal(count)
        sizes = np.exp(math.log(self.median_bytes) + self.sigma * draws)
        return np.maximum(sizes.round(), 1).astype(np.int64)


@dataclass(frozen=True)
class DocumentSpec:
    """What the collection looks like: how many documents, how big, how fragile.

    fragility >= 1 is the damage divisor per block error. Fragility above 1
    is realized through the expected-proportion equivalence: the collection
    is simulated as round(count * F) fully fragile documents of 1/F the
    size.
    """

    count: int
    size: ConstantSize | LogNormalSize = ConstantSize(5 * 2**20)
    fragility: float = 1.0

    def __post_init__(self):
        if self.count < 1:
            raise ConfigurationError(f"doc count must be >= 1, got {self.count}")
        if self.fragility < 1:
            raise ConfigurationError(f"fragility must be >= 1, got {self.fragility}")

    def realize(self, rng) -> np.ndarray:
        """Per-document byte sizes, with the fragility transform applied."""
        if self.fragility == 1.0:
            return self.size.realize(self.count, rng)
        n_equiv = self.count * self.fragility
        count = int(round(n_equiv))
        sizes = self.size.realize(count, rng)
        return np.maximum((sizes / self.fragility).round(), 1).astype(np.int64)


@dataclass(frozen=True)
class DocAuditPolicy:
    """Cyclic document auditing.

    Every cycle is split into `segments` evenly spaced passes. Systematic
    sampling partitions a fresh permutation of the collection, so every
    document is audited exactly once per cycle; random sampling draws with
    replacement and misses an expected (1-1/N)^N fraction. fixity "full"
    retrieves whole copies to check them; "hash" models a remote fixity
    check with no retrieval egress (repairs still move bytes).
    """

    cycle: float
    segments: int = 1
    strategy: str = SYSTEMATIC
    fixity: str = FIXITY_FULL

    def __post_init__(self):
        if not self.cycle > 0:
            raise ConfigurationError(f"audit cycle must be positive, got {self.cycle}")
        if self.segments < 1:
            raise ConfigurationError(f"segments must be >= 1, got {self.segments}")
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(f"unknown audit strategy {self.strategy!r}")
        if self.fixity not in (FIXITY_FULL, FIXITY_HASH):
            raise ConfigurationError(f"unknown fixity mode {self.fixity!r}")


@dataclass(frozen=True)
class ProbePolicy:
    """Periodic cheap liveness checks: retrieve a few documents per server."""

    interval: float
    probe_count: int = 3

    def __post_init__(self):
        if not self.interval > 0:
            raise ConfigurationError(f"probe interval must be positive, got {self.interval}")
        if self.probe_count < 1:
            raise ConfigurationError(f"probe_count must be >= 1, got {self.probe_count}")


@dataclass(frozen=True)
class AuditPolicy:
    doc_audit: DocAuditPolicy | None = None
    server_probe: ProbePolicy | None = None


@dataclass(frozen=True)
class RepairPolicy:
    """How dead servers are replaced.

    repopulation_delay is the time to provision a fresh server and fill it;
    repairs always copy from the lowest-id live server holding a valid copy.
    """

    repopulation_delay: float = 0.0

    def __post_init__(self):
        if self.repopulation_delay < 0:
            raise ConfigurationError("repopulation_delay must be >= 0")


# ---------------------------------------------------------------------------
# Live state


@dataclass
class ServerState:
    """One storage server and the validity of its copies."""

    id: int
    n_docs: int
    birth_time: float = 0.0
    alive: bool = True
    retired: bool = False
    pending_replacement: bool = False
    glitch_multiplier: float = 1.0
    shock_multiplier: float = 1.0
    fail_epoch: int = 0
    pending_fail: float = math.inf
    stored_bytes: int = 0
    bill_from: float = 0.0
    present: np.ndarray = None
    valid: np.ndarray = None
    corr_time: np.ndarray = None

    def __post_init__(self):
        if self.present is None:
            self.present = np.ones(self.n_docs, dtype=bool)
        if self.valid is None:
            self.valid = self.present.copy()
        if self.corr_time is None:
            self.corr_time = np.full(self.n_docs, np.inf)


class CollectionState:
    """Everything one run mutates: documents, servers, losses, the ledger."""

    def __init__(self, doc_sizes: np.ndarray, target_copies: int, ledger: CostLedger):
        if target_copies < 1:
            raise ConfigurationError(f"target_copies must be >= 1, got {target_copies}")
        self.doc_sizes = np.asarray(doc_sizes, dtype=np.int64)
        self.n_docs = len(self.doc_sizes)
        self.target_copies = target_copies
        self.ledger = ledger
        self.servers: list[ServerState] = []
        total = int(self.doc_sizes.sum())
        for sid in range(target_copies):
            self.servers.append(
                ServerState(id=sid, n_docs=self.n_docs, stored_bytes=total)
            )
        self.valid_count = np.full(self.n_docs, target_copies, dtype=np.int32)
        self.lost_time = np.full(self.n_docs, np.nan)
        self.n_lost = 0
        self.replacement_impossible = False

    # -- lookups ------------------------------------------------------------

    def server(self, server_id: int) -> ServerState:
        if 0 <= server_id < len(self.servers):
            srv = self.servers[server_id]
            if not srv.retired:
                return srv
        raise SimulationLogicError(f"unknown or retired server id {server_id}")

    def known_servers(self):
        """Servers the curator still tracks (not yet replaced)."""
        return [s for s in self.servers if not s.retired]

    def live_servers(self):
        return [s for s in self.servers if s.alive]

    @property
    def all_lost(self) -> bool:
        return self.n_lost >= self.n_docs

    # -- bookkeeping --------------------------------------------------------

    def bill_server(self, srv: ServerState, now: float) -> None:
        """Close the server's constant-level storage interval ending now."""
        if now > srv.bill_from:
            if srv.alive and srv.stored_bytes > 0:
                self.ledger.accrue_storage(srv.stored_bytes, now - srv.bill_from)
            srv.bill_from = now

    def record_losses(self, doc_mask: np.ndarray, times) -> None:
        """Mark newly lost documents; times is a scalar or per-doc array."""
        if not doc_mask.any():
            return
        if np.isscalar(times):
            self.lost_time[doc_mask] = times
        else:
            self.lost_time[doc_mask] = times[doc_mask]
        self.n_lost += int(doc_mask.sum())

    def mark_copy_corrupt(self, server_id: int, doc_id: int, when: float) -> None:
        """Silently corrupt one copy, recording a loss if it was the last."""
        srv = self.server(server_id)
        if not srv.alive or not srv.valid[doc_id]:
            return
        self.bill_server(srv, when)
        srv.valid[doc_id] = False
        srv.corr_time[doc_id] = np.inf
        srv.stored_bytes -= int(self.doc_sizes[doc_id])
        self.valid_count[doc_id] -= 1
        if self.valid_count[doc_id] == 0:
            mask = np.zeros(self.n_docs, dtype=bool)
            mask[doc_id] = True
            self.record_losses(mask, when)

    def kill_server(self, server_id: int, now: float) -> None:
        """A server fails: every copy it held is gone, silently."""
        srv = self.server(server_id)
        if not srv.alive:
            return
        self.bill_server(srv, now)
        srv.alive = False
        gone = srv.valid.copy()
        srv.valid[:] = False
        srv.corr_time[:] = np.inf
        srv.stored_bytes = 0
        if gone.any():
            old = self.valid_count[gone]
            self.valid_count[gone] -= 1
            newly_lost = np.zeros(self.n_docs, dtype=bool)
            newly_lost[gone] = old == 1
            self.record_losses(newly_lost, now)


# ---------------------------------------------------------------------------
# Reports


@dataclass
class AuditReport:
    time: float
    docs_audited: int = 0
    copies_checked: int = 0
    repairs: list = field(default_factory=list)
    losses: np.ndarray = None
    dead_servers: list = field(default_factory=list)
    egress_bytes: int = 0
    ingress_bytes: int = 0

    @property
    def repair_count(self) -> int:
        return sum(len(ids) for _, ids in self.repairs)


@dataclass
class LossReport:
    doc_count: int
    lost_count: int
    lost_fraction: float
    first_loss_time: float | None
    total_collection_loss: bool
    loss_times: np.ndarray


# ---------------------------------------------------------------------------
# Policy operations


def build_segments(doc_count: int, segments: int, strategy: str, cycle_index: int, rng) -> list[np.ndarray]:
    """Assign documents to one cycle's audit segments.

    Systematic sampling partitions a fresh permutation into near-equal
    parts, covering every document exactly once per cycle. Random sampling
    draws each segment's quota independently with replacement, so documents
    can repeat or be missed entirely. cycle_index is informational; the
    permutation is reshuffled every cycle.
    """
    if doc_count < 1 or segments < 1:
        raise ConfigurationError("doc_count and segments must be >= 1")
    if strategy not in STRATEGIES:
        raise ConfigurationError(f"unknown audit strategy {strategy!r}")
    gen = rng.generator if hasattr(rng, "generator") else rng
    if strategy == SYSTEMATIC:
        perm = gen.permutation(doc_count)
        return [np.sort(part) for part in np.array_split(perm, segments)]
    quota = [len(part) for part in np.array_split(np.empty(doc_count), segments)]
    return [gen.integers(0, doc_count, size=q) for q in quota]


def audit_documents(state: CollectionState, segment: np.ndarray, now: float, fixity: str = FIXITY_FULL) -> AuditReport:
    """Check every copy of each document in the segment; repair what it can.

    Checking a copy on a live server retrieves it (egress charged per copy
    in full fixity mode). Corrupt copies are repaired from the lowest-id
    valid copy: one egress from the source plus one ingress to the target
    per repair. Documents with no valid copy anywhere were already recorded
    lost at their last copy's destruction time; the report merely surfaces
    them. Copies on dead servers are skipped, but touching a dead server
    establishes that it is dead (the report lists it for server-level
    handling).
    """
    seg = np.asarray(segment, dtype=np.int64)
    report = AuditReport(time=now, docs_audited=len(seg))
    if len(seg) == 0:
        report.losses = np.empty(0, dtype=np.int64)
        return report
    if seg.min() < 0 or seg.max() >= state.n_docs:
        raise SimulationLogicError("audit segment contains invalid document indices")
    sizes = state.doc_sizes
    egress = 0
    ingress = 0
    for srv in state.known_servers():
        if not srv.alive:
            report.dead_servers.append(srv.id)
            continue
        checked = seg[srv.present[seg]]
        if len(checked) == 0:
            continue
        report.copies_checked += len(checked)
        if fixity == FIXITY_FULL:
            egress += int(sizes[checked].sum())
        # a with-replacement segment can draw a document twice: both touches
        # are retrieved (and charged), but the copy is repaired only once
        corrupt = np.unique(checked[~srv.valid[checked]])
        repairable = corrupt[state.valid_count[corrupt] > 0]
        if len(repairable):
            state.bill_server(srv, now)
            srv.valid[repairable] = True
            srv.stored_bytes += int(sizes[repairable].sum())
            state.valid_count[repairable] += 1
            moved = int(sizes[repairable].sum())
            egress += moved
            ingress += moved
            report.repairs.append((srv.id, repairable))
    report.losses = np.unique(seg[state.valid_count[seg] == 0])
    report.egress_bytes = egress
    report.ingress_bytes = ingress
    state.ledger.accrue_transfer(egress, "egress")
    state.ledger.accrue_transfer(ingress, "ingress")
    return report


def probe_server(state: CollectionState, server_id: int, probe_count: int, now: float, rng) -> bool:
    """Liveness probe: retrieve a few sample documents from one server.

    Returns True (alive) or False (dead); detection is certain. A live
    probe charges egress for the sampled document sizes, a dead server
    transfers nothing.
    """
    if probe_count < 1:
        raise ConfigurationError(f"probe_count must be >= 1, got {probe_count}")
    srv = state.server(server_id)
    if not srv.alive:
        return False
    gen = rng.generator if hasattr(rng, "generator") else rng
    picks = gen.integers(0, state.n_docs, size=probe_count)
    state.ledger.accrue_transfer(int(state.doc_sizes[picks].sum()), "egress")
    return True


def probe_all_servers(state: CollectionState, probe_count: int, now: float, rng) -> list[int]:
    """One probing pass over every tracked server; returns the dead ids.

    Equivalent to probe_server per server, with the sample draws batched
    and the pass's egress accrued as a single charge.
    """
    if probe_count < 1:
        raise ConfigurationError(f"probe_count must be >= 1, got {probe_count}")
    gen = rng.generator if hasattr(rng, "generator") else rng
    dead = []
    n_live = 0
    for srv in state.servers:
        if srv.retired:
            continue
        if srv.alive:
            n_live += 1
        else:
            dead.append(srv.id)
    if n_live:
        picks = gen.integers(0, state.n_docs, size=n_live * probe_count)
        state.ledger.accrue_transfer(int(state.doc_sizes[picks].sum()), "egress")
    return dead


def replace_server(state: CollectionState, dead_id: int, now: float, repair: RepairPolicy) -> float | None:
    """Start replacing a detected-dead server.

    Returns the activation time (now + repopulation delay) for the caller
    to schedule, or None when replacement is already in flight or
    impossible because no live server remains (in which case the whole
    collection is necessarily lost already).
    """
    srv = state.server(dead_id)
    if srv.alive:
        raise SimulationLogicError(f"server {dead_id} is alive; nothing to replace")
    if srv.pending_replacement:
        return None
    srv.pending_replacement = True
    if not state.live_servers():
        state.replacement_impossible = True
        return None
    return now + repair.repopulation_delay


def activate_replacement(state: CollectionState, dead_id: int, now: float) -> ServerState | None:
    """Bring the replacement online and repopulate it.

    Every document with at least one valid copy on a live server is copied
    in (egress from sources, ingress to the new server); the fresh copies
    are read back as they land, so they start out verified. Documents with
    no valid copy anywhere stay lost. Returns the new server, or None when
    there was nothing left to copy.
    """
    old = state.server(dead_id)
    old.retired = True
    recoverable = state.valid_count > 0
    if not recoverable.any():
        state.replacement_impossible = True
        return None
    new = ServerState(
        id=len(state.servers),
        n_docs=state.n_docs,
        birth_time=now,
        present=recoverable.copy(),
        valid=recoverable.copy(),
        stored_bytes=int(state.doc_sizes[recoverable].sum()),
        bill_from=now,
    )
    state.servers.append(new)
    state.valid_count[recoverable] += 1
    moved = new.stored_bytes
    state.ledger.accrue_transfer(moved, "egress")
    state.ledger.accrue_transfer(moved, "ingress")
    return new


def loss_metrics(state: CollectionState, horizon: float) -> LossReport:
    """Summarize permanent losses at the end of a run."""
    lost = ~np.isnan(state.lost_time)
    lost_count = int(lost.sum())
    times = state.lost_time[lost]
    return LossReport(
        doc_count=state.n_docs,
        lost_count=lost_count,
        lost_fraction=lost_count / state.n_docs,
        first_loss_time=float(times.min()) if lost_count else None,
        total_collection_loss=lost_count == state.n_docs,
        loss_times=np.sort(times),
    )
