"""Deterministic seeded discrete-event kernel.

One engine owns a simulation clock, a time-ordered event queue and a family
of independent random streams derived from a single 64-bit seed. Everything
stochastic in a run flows through the engine's streams, so a (scenario,
seed) pair fully determines the run.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, SimulationLogicError

# ---------------------------------------------------------------------------
# Event kinds. One variant family per threat layer, plus the policy and
# bookkeeping events. Every variant carries enough identity to be ignored
# idempotently when its target no longer exists (dead server, stale epoch).


@dataclass(frozen=True, slots=True)
class CopyCorruption:
    server_id: int
    doc_id: int
    epoch: int = 0


@dataclass(frozen=True, slots=True)
class GlitchStart:
    server_id: int
    channel: int = 0


@dataclass(frozen=True, slots=True)
class GlitchEnd:
    server_id: int
    channel: int = 0


@dataclass(frozen=True, slots=True)
class ServerFailure:
    server_id: int
    epoch: int = 0


@dataclass(frozen=True, slots=True)
class ShockRateStart:
    shock_index: int = 0


@dataclass(frozen=True, slots=True)
class ShockRateEnd:
    shock_index: int = 0


@dataclass(frozen=True, slots=True)
class ShockSpan:
    shock_index: int = 0


@dataclass(frozen=True, slots=True)
class DocumentAudit:
    segment_index: int
    cycle_index: int = 0


@dataclass(frozen=True, slots=True)
class ServerProbe:
    pass


@dataclass(frozen=True, slots=True)
class ServerActivation:
    """A replacement server comes online (end of repopulation delay)."""

    replaced_id: int


@dataclass(frozen=True, slots=True)
class Horizon:
    pass


EVENT_KINDS = (
    CopyCorruption,
    GlitchStart,
    GlitchEnd,
    ServerFailure,
    ShockRateStart,
    ShockRateEnd,
    ShockSpan,
    DocumentAudit,
    ServerProbe,
    ServerActivation,
    Horizon,
)


@dataclass
class SimClock:
    """Simulation clock in hours; never moves backwards."""

    now: float = 0.0
    horizon: float = 0.0


class EventQueue:
    """Min-heap of (time, sequence, event).

    Dispatch order is time ascending with ties broken by scheduling order,
    so replays of the same schedule are deterministic.
    """

    def __init__(self):
        self._heap = []
        self._next_seq = 0

    def __len__(self):
        return len(self._heap)

    def push(self, at: float, event) -> None:
        heapq.heappush(self._heap, (at, self._next_seq, event))
        self._next_seq += 1

    def peek_time(self):
        return self._heap[0][0] if self._heap else None

    def pop(self):
        return heapq.heappop(self._heap)


class RngStream:
    """One independent random stream, identified by (seed, stream_id).

    Streams are derived with numpy's SeedSequence spawn-key mechanism, so the
    same pair yields the same draw sequence on every platform and distinct
    stream ids are statistically independent.
    """

    def __init__(self, seed: int, stream_id: int):
        self.seed = seed
        self.stream_id = stream_id
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))


def draw_exponential(rng, hazard: float) -> float:
    """Sample an exponential inter-arrival in hours at the given per-hour rate.

    Uses inverse-CDF sampling -ln(u)/hazard with u uniform in (0, 1]. A zero
    hazard returns +inf, the "never fires" sentinel.
    """
    if hazard < 0:
        raise ConfigurationError(f"hazard must be >= 0, got {hazard}")
    if hazard == 0:
        return math.inf
    gen = rng.generator if isinstance(rng, RngStream) else rng
    u = gen.random()
    return -math.log1p(-u) / hazard


def draw_exponential_batch(rng, hazards) -> np.ndarray:
    """Vectorised draw_exponential for an array of per-hour rates."""
    gen = rng.generator if isinstance(rng, RngStream) else rng
    hazards = np.asarray(hazards, dtype=np.float64)
    if np.any(hazards < 0):
        raise ConfigurationError("hazards must be >= 0")
    u = gen.random(hazards.shape)
    with np.errstate(divide="ignore"):
        return np.where(hazards > 0, -np.log1p(-u) / np.where(hazards > 0, hazards, 1.0), np.inf)


@dataclass
class EventTrace:
    """Ordered record of dispatched events: (time, event) pairs."""

    entries: list = field(default_factory=list)
    truncated: bool = False

    def append(self, at, event, limit=None):
        if limit is not None and len(self.entries) >= limit:
            self.truncated = True
            return
        self.entries.append((at, event))

    def times(self):
        return [t for t, _ in self.entries]

    def kinds(self):
        return [type(e).__name__ for t, e in self.entries]


class Engine:
    """Single-run event loop. Strictly single-threaded for one run."""

    def __init__(self, seed: int, horizon: float):
        if not horizon > 0:
            raise ConfigurationError(f"horizon must be positive, got {horizon}")
        self.seed = int(seed)
        self.clock = SimClock(now=0.0, horizon=float(horizon))
        self.queue = EventQueue()
        self._streams: dict[int, RngStream] = {}

    def stream(self, stream_id: int) -> RngStream:
        st = self._streams.get(stream_id)
        if st is None:
            st = RngStream(self.seed, stream_id)
            self._streams[stream_id] = st
        return st

    def schedule(self, at: float, event) -> None:
        """Enqueue an event. Events past the horizon are accepted but never run."""
        if at < self.clock.now:
            raise SimulationLogicError(
                f"cannot schedule {type(event).__name__} at t={at} "
                f"before now={self.clock.now}"
            )
        self.queue.push(at, event)

    def run(self, handlers, collect_trace: bool = True, trace_limit=None) -> EventTrace:
        """Dispatch queued events in contract order up to the horizon.

        ``handlers`` maps every event class to a callable ``(now, event)``.
        A handler exception aborts the run; it is re-raised with the event
        context attached.
        """
        for kind in EVENT_KINDS:
            if kind not in handlers:
                raise SimulationLogicError(f"no handler for event kind {kind.__name__}")
        trace = EventTrace()
        horizon = self.clock.horizon
        queue = self.queue
        clock = self.clock
        while len(queue):
            if queue.peek_time() > horizon:
                break
            at, _, event = queue.pop()
            clock.now = at
            if collect_trace:
                trace.append(at, event, trace_limit)
            try:
                handlers[type(event)](at, event)
            except Exception as exc:
                raise SimulationLogicError(
                    f"handler for {event!r} failed at t={at}: {exc}"
                ) from exc
        clock.now = horizon
        terminal = Horizon()
        if collect_trace:
            trace.append(horizon, terminal, trace_limit)
        try:
            handlers[Horizon](horizon, terminal)
        except Exception as exc:
            raise SimulationLogicError(
                f"handler for {terminal!r} failed at t={horizon}: {exc}"
            ) from exc
        return trace


def create_engine(seed: int, horizon: float) -> Engine:
    """Build an engine with an empty queue, clock at zero and seeded streams."""
    return Engine(seed, horizon)
