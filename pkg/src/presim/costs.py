"""Tiered tariffs and the per-run cost ledger.

Vendors charge per GB-month stored and per GB moved in or out. Schedules
are graduated ("marginal") with quantity discounts: each tier's span is
priced at its own rate, so the average unit price never increases with
volume. Every replica lives with its own vendor, so storage is billed per
server against the tariff; transfers are billed per dispatched event on
that event's byte total.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .units import GB, MONTH_HOURS


def _validate_tiers(tiers, label: str):
    if not tiers:
        raise ConfigurationError(f"{label}: at least one tier required")
    prev_bound = 0.0
    prev_price = None
    for i, (bound, price) in enumerate(tiers):
        if price < 0:
            raise ConfigurationError(f"{label}: tier {i} price must be >= 0")
        if prev_price is not None and price > prev_price:
            raise ConfigurationError(
                f"{label}: tier prices must not increase (quantity discounts)"
            )
        prev_price = price
        if bound is None:
            if i != len(tiers) - 1:
                raise ConfigurationError(f"{label}: only the last tier may be unbounded")
        else:
            if bound <= prev_bound:
                raise ConfigurationError(f"{label}: tier bounds must strictly increase")
            prev_bound = bound
    if tiers[-1][0] is not None:
        raise ConfigurationError(f"{label}: last tier must be unbounded")


@dataclass(frozen=True)
class Tariff:
    """Price schedules: storage in currency/GB-month, transfers in currency/GB.

    Each schedule is a list of (upper_bound_gb, price) with the final bound
    None (unbounded).
    """

    storage: tuple
    ingress: tuple
    egress: tuple

    def __post_init__(self):
        object.__setattr__(self, "storage", tuple((b, p) for b, p in self.storage))
        object.__setattr__(self, "ingress", tuple((b, p) for b, p in self.ingress))
        object.__setattr__(self, "egress", tuple((b, p) for b, p in self.egress))
        _validate_tiers(self.storage, "storage tariff")
        _validate_tiers(self.ingress, "ingress tariff")
        _validate_tiers(self.egress, "egress tariff")

    @classmethod
    def flat(cls, storage=0.02, ingress=0.0, egress=0.09) -> "Tariff":
        return cls(
            storage=((None, storage),),
            ingress=((None, ingress),),
            egress=((None, egress),),
        )


def _tiered_price_unchecked(amount_gb: float, tiers) -> float:
    total = 0.0
    prev = 0.0
    for bound, price in tiers:
        top = amount_gb if bound is None else min(amount_gb, bound)
        if top > prev:
            total += (top - prev) * price
        if bound is None or amount_gb <= bound:
            break
        prev = bound
    return total


def tiered_price(amount_gb: float, tiers) -> float:
    """Graduated price of `amount_gb` under a tier schedule."""
    if amount_gb < 0:
        raise ConfigurationError(f"amount must be >= 0, got {amount_gb}")
    _validate_tiers(tiers, "tiers")
    return _tiered_price_unchecked(amount_gb, tiers)


def tiered_price_array(amounts_gb: np.ndarray, tiers) -> np.ndarray:
    """tiered_price over an array of amounts (validation done by the caller)."""
    amounts_gb = np.asarray(amounts_gb, dtype=np.float64)
    total = np.zeros_like(amounts_gb)
    prev = 0.0
    for bound, price in tiers:
        top = amounts_gb if bound is None else np.minimum(amounts_gb, bound)
        total += np.maximum(top - prev, 0.0) * price
        if bound is None:
            break
        prev = bound
    return total


@dataclass
class CostLedger:
    """Accumulates storage, ingress and egress charges over one run.

    All accumulators are non-negative and non-decreasing. With
    itemize=True every accrual is also journaled as
    (kind, gb_or_bytes, hours_or_None, amount) so totals can be replayed
    and audited entry by entry.
    """

    tariff: Tariff
    storage_cost: float = 0.0
    ingress_cost: float = 0.0
    egress_cost: float = 0.0
    byte_months: float = 0.0
    ingress_bytes: int = 0
    egress_bytes: int = 0
    itemize: bool = False
    journal: list = field(default_factory=list)

    def accrue_storage(self, stored_bytes: float, hours: float) -> None:
        """Charge one constant-level interval of storage on one server."""
        if hours < 0:
            raise ConfigurationError(f"interval must be >= 0, got {hours}")
        if hours == 0 or stored_bytes <= 0:
            return
        gb = stored_bytes / GB
        months = hours / MONTH_HOURS
        amount = _tiered_price_unchecked(gb, self.tariff.storage) * months
        self.storage_cost += amount
        self.byte_months += stored_bytes * months
        if self.itemize:
            self.journal.append(("storage", gb, hours, amount))

    def accrue_storage_steps(self, levels_bytes: np.ndarray, durations: np.ndarray) -> None:
        """Charge a stepwise storage profile (levels held for durations)."""
        levels_bytes = np.asarray(levels_bytes, dtype=np.float64)
        durations = np.asarray(durations, dtype=np.float64)
        keep = (durations > 0) & (levels_bytes > 0)
        if not keep.any():
            return
        levels = levels_bytes[keep]
        hours = durations[keep]
        months = hours / MONTH_HOURS
        amounts = tiered_price_array(levels / GB, self.tariff.storage) * months
        self.storage_cost += float(amounts.sum())
        self.byte_months += float((levels * months).sum())
        if self.itemize:
            for lv, h, a in zip(levels / GB, hours, amounts):
                self.journal.append(("storage", float(lv), float(h), float(a)))

    def accrue_transfer(self, n_bytes: int, direction: str) -> None:
        """Charge one transfer (one event's total bytes in one direction)."""
        if n_bytes < 0:
            raise ConfigurationError(f"bytes must be >= 0, got {n_bytes}")
        if n_bytes == 0:
            return
        gb = n_bytes / GB
        if direction == "ingress":
            amount = _tiered_price_unchecked(gb, self.tariff.ingress)
            self.ingress_cost += amount
            self.ingress_bytes += int(n_bytes)
        elif direction == "egress":
            amount = _tiered_price_unchecked(gb, self.tariff.egress)
            self.egress_cost += amount
            self.egress_bytes += int(n_bytes)
        else:
            raise ConfigurationError(f"direction must be ingress or egress, got {direction!r}")
        if self.itemize:
            self.journal.append((direction, gb, None, amount))

    @property
    def total_cost(self) -> float:
        return self.storage_cost + self.ingress_cost + self.egress_cost
