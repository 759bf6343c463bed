"""Closed-form durability arithmetic.

These are the analytic companions to the simulator: Poisson loss
probabilities for unaudited copies, the balls-in-urns audit-miss fraction,
the fragility/compression transforms, and replica-count arithmetic for
subverted auditors. They double as independent oracles when validating
simulated results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError
from .risks import LN2


@dataclass(frozen=True)
class FragilityProfile:
    """Collection shape for compression/fragility reasoning.

    doc_count documents of size_blocks blocks each; fragility >= 1 is the
    damage divisor (1 means a single block error destroys the document).
    compression_ratio C >= 1 is original size over compressed size, and
    compressed_fragility F' satisfies F >= F' >= 1.
    """

    doc_count: int
    size_blocks: float
    fragility: float = 1.0
    compression_ratio: float = 1.0
    compressed_fragility: float = 1.0

    def __post_init__(self):
        if self.doc_count < 1 or self.size_blocks <= 0:
            raise ConfigurationError("doc_count and size_blocks must be positive")
        if not (self.fragility >= self.compressed_fragility >= 1.0):
            raise ConfigurationError("fragility must satisfy F >= F' >= 1")
        if self.compression_ratio < 1.0:
            raise ConfigurationError("compression_ratio must be >= 1")


def p_doc_loss_single_copy(blocks: float, block_half_life: float, t: float) -> float:
    """P(a single unaudited copy is corrupted by time t).

    Block errors arrive Poisson at rate blocks * ln2 / half_life, and any
    block error destroys the copy, so this is 1 - exp(-rate * t).
    """
    if blocks <= 0 or not block_half_life > 0 or t < 0:
        raise ConfigurationError("blocks, half-life must be positive and t >= 0")
    if math.isinf(block_half_life):
        return 0.0
    return -math.expm1(-blocks * LN2 / block_half_life * t)


def p_doc_loss_unaudited(copies: int, blocks: float, block_half_life: float, t: float) -> float:
    """P(all `copies` independent unaudited copies are corrupted by time t)."""
    if copies < 1:
        raise ConfigurationError(f"copies must be >= 1, got {copies}")
    return p_doc_loss_single_copy(blocks, block_half_life, t) ** copies


def expected_unaudited_fraction(doc_count: int, draws: int) -> float:
    """Expected fraction of documents missed by with-replacement sampling.

    Drawing `draws` documents uniformly with replacement from doc_count
    leaves each document untouched with probability (1 - 1/N)^draws; with
    draws = N this approaches 1/e from below as N grows, which is why
    with-replacement auditing is ineffective.
    """
    if doc_count < 1:
        raise ConfigurationError(f"doc_count must be >= 1, got {doc_count}")
    if draws < 0:
        raise ConfigurationError(f"draws must be >= 0, got {draws}")
    return (1.0 - 1.0 / doc_count) ** draws


@dataclass(frozen=True)
class FragilityEquivalent:
    doc_count: float
    size_blocks: float
    fragility: float
    exact: bool


def fragility_equivalent(doc_count: int, size_blocks: float, fragility: float) -> FragilityEquivalent:
    """Equivalent fully-fragile collection: (N*F documents, S/F blocks, F=1).

    The expected proportion of losses is preserved; total block count N*S is
    preserved exactly. When N*F is not an integer or S/F falls below one
    block the equivalence only holds at the expectation level and the result
    is flagged exact=False.
    """
    if fragility < 1:
        raise ConfigurationError(f"fragility must be >= 1, got {fragility}")
    if doc_count < 1 or size_blocks <= 0:
        raise ConfigurationError("doc_count and size_blocks must be positive")
    n_equiv = doc_count * fragility
    s_equiv = size_blocks / fragility
    exact = float(n_equiv).is_integer() and s_equiv >= 1.0
    return FragilityEquivalent(n_equiv, s_equiv, 1.0, exact)


def compression_reduces_loss(compression_ratio: float, fragility: float, compressed_fragility: float) -> bool:
    """Whether compressing is expected to reduce losses: C * F' >= F.

    The smaller target (factor C) must at least offset the added fragility
    (F dropping to F').
    """
    FragilityProfile(
        doc_count=1,
        size_blocks=1.0,
        fragility=fragility,
        compression_ratio=compression_ratio,
        compressed_fragility=compressed_fragility,
    )
    return compression_ratio * compressed_fragility >= fragility


def byzantine_min_replicas(subverted: int, span: int = 0) -> int:
    """Replicas needed against `subverted` corrupt auditors plus a shock span.

    Byzantine agreement needs 3s+1 replicas; a shock that can destroy `span`
    servers at random must be absorbed on top of that.
    """
    if subverted < 0 or span < 0:
        raise ConfigurationError("subverted and span must be >= 0")
    return 3 * subverted + 1 + span
