"""Hazard-rate models for the four threat layers.

Layers, smallest to largest: storage blocks silently corrupting document
copies; per-server environmental glitches that multiply the block error rate
for a while; whole-server failures with exponential lifetimes; and macro
shocks that either multiply server failure rates or destroy several servers
at once. All rates derive from half-lives via hazard = ln2 / half_life.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import draw_exponential
from .errors import ConfigurationError, SimulationLogicError
from .units import DEFAULT_BLOCK_SIZE, MEGAHOUR

LN2 = math.log(2.0)

# Block half-life grid (hours) spanning the plausible disk-quality band,
# extended down to cover glitch-degraded environments.
PLAUSIBLE_SECTOR_HALF_LIVES = tuple(
    m * MEGAHOUR for m in (20, 30, 50, 100, 200, 500, 1000)
)


def hazard_from_half_life(half_life: float) -> float:
    """Per-hour hazard rate for an exponentially distributed lifetime.

    half_life may be +inf, meaning the process never fires (hazard 0).
    """
    if not half_life > 0:
        raise ConfigurationError(f"half-life must be positive, got {half_life}")
    if math.isinf(half_life):
        return 0.0
    return LN2 / half_life


@dataclass(frozen=True)
class SectorModel:
    """Block-level corruption: each block fails independently.

    block_half_life is +inf for error-corrected ("immortal") storage.
    """

    block_half_life: float
    block_size: int = DEFAULT_BLOCK_SIZE

    def __post_init__(self):
        if not self.block_half_life > 0:
            raise ConfigurationError(
                f"block_half_life must be positive, got {self.block_half_life}"
            )
        if self.block_size <= 0:
            raise ConfigurationError(f"block_size must be positive, got {self.block_size}")

    @property
    def block_hazard(self) -> float:
        return hazard_from_half_life(self.block_half_life)

    def blocks_for(self, doc_size) -> np.ndarray:
        """Number of blocks a document of the given byte size occupies."""
        return np.ceil(np.asarray(doc_size, dtype=np.float64) / self.block_size).astype(
            np.int64
        )


@dataclass(frozen=True)
class GlitchModel:
    """Transient local-environment stress on one server.

    Arrivals form a per-server renewal process: the next arrival is drawn
    when the previous glitch ends, so a single channel never overlaps itself
    (an infinite duration therefore makes the excursion permanent). Glitches
    from different channels may overlap and compose multiplicatively.
    """

    arrival_half_life: float
    duration: float
    multiplier: float

    def __post_init__(self):
        if not self.arrival_half_life > 0:
            raise ConfigurationError("glitch arrival_half_life must be positive")
        if self.duration < 0:
            raise ConfigurationError("glitch duration must be >= 0")
        if self.multiplier < 1:
            raise ConfigurationError(
                f"glitch multiplier must be >= 1, got {self.multiplier}"
            )

    @property
    def arrival_hazard(self) -> float:
        return hazard_from_half_life(self.arrival_half_life)


@dataclass(frozen=True)
class ServerModel:
    """Whole-server lifetime; exponential, hence memoryless."""

    lifetime_half_life: float

    def __post_init__(self):
        if not self.lifetime_half_life > 0:
            raise ConfigurationError("server lifetime_half_life must be positive")

    @property
    def base_hazard(self) -> float:
        return hazard_from_half_life(self.lifetime_half_life)


@dataclass(frozen=True)
class RateShock:
    """Macro event multiplying server failure rates for a duration.

    scope_size None means every server is affected; otherwise a uniform
    random subset of that many live servers, chosen at shock start. Like
    glitches, each shock channel is a renewal process (next arrival drawn at
    shock end), so duration=inf expresses a permanent excursion.
    """

    arrival_half_life: float
    duration: float
    multiplier: float
    scope_size: int | None = None

    def __post_init__(self):
        if not self.arrival_half_life > 0:
            raise ConfigurationError("shock arrival_half_life must be positive")
        if self.duration < 0:
            raise ConfigurationError("shock duration must be >= 0")
        if self.multiplier < 1:
            raise ConfigurationError(
                f"shock multiplier must be >= 1, got {self.multiplier}"
            )
        if self.scope_size is not None and self.scope_size < 1:
            raise ConfigurationError("shock scope subset size must be >= 1")

    @property
    def arrival_hazard(self) -> float:
        return hazard_from_half_life(self.arrival_half_life)


@dataclass(frozen=True)
class SpanShock:
    """Macro event destroying `span` randomly chosen live servers at once."""

    arrival_half_life: float
    span: int

    def __post_init__(self):
        if not self.arrival_half_life > 0:
            raise ConfigurationError("shock arrival_half_life must be positive")
        if self.span < 1:
            raise ConfigurationError(f"shock span must be >= 1, got {self.span}")

    @property
    def arrival_hazard(self) -> float:
        return hazard_from_half_life(self.arrival_half_life)


ShockModel = RateShock | SpanShock


def copy_corruption_hazard(doc_size: int, sector: SectorModel, glitch_multiplier: float = 1.0) -> float:
    """Corruption rate of one document copy: blocks x block hazard x glitches.

    Larger documents span more blocks and present a proportionally larger
    target, so the hazard is linear in block count.
    """
    if doc_size <= 0:
        raise ConfigurationError(f"doc_size must be positive, got {doc_size}")
    if glitch_multiplier < 1:
        raise ConfigurationError(
            f"glitch_multiplier must be >= 1, got {glitch_multiplier}"
        )
    blocks = math.ceil(doc_size / sector.block_size)
    return blocks * sector.block_hazard * glitch_multiplier


def effective_server_hazard(server: ServerModel, rate_shock_multiplier: float = 1.0) -> float:
    """Server failure rate under the currently active rate-shock multiplier.

    A shock multiplying the rate by m is equivalent to a server whose
    half-life is divided by m.
    """
    if rate_shock_multiplier < 1:
        raise ConfigurationError(
            f"rate_shock_multiplier must be >= 1, got {rate_shock_multiplier}"
        )
    return server.base_hazard * rate_shock_multiplier


def resample_on_rate_change(pending_failure_time: float, now: float, new_hazard: float, rng) -> float:
    """Fresh absolute failure time after a rate change.

    Exponential memorylessness lets us discard the stale pending draw and
    sample anew at the current rate; the superseded event must be cancelled
    or tombstoned by the caller.
    """
    if pending_failure_time < now:
        raise SimulationLogicError(
            f"pending failure at t={pending_failure_time} already fired before now={now}"
        )
    return now + draw_exponential(rng, new_hazard)


def apply_span_shock(live_server_ids, span: int, rng) -> list:
    """Pick the victims of a span shock: min(span, live) distinct servers.

    Victims are sampled uniformly at random. Returns an empty list when no
    server is left alive.
    """
    if span < 1:
        raise ConfigurationError(f"span must be >= 1, got {span}")
    live = list(live_server_ids)
    if not live:
        return []
    k = min(span, len(live))
    gen = rng.generator if hasattr(rng, "generator") else rng
    picked = gen.choice(len(live), size=k, replace=False)
    return [live[i] for i in sorted(picked)]
