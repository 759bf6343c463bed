"""Scenario files: schema, validation, normalization and presets.

A scenario is one fully parameterized world: the collection, the replica
count, the four risk layers, the audit/repair policies, the tariff and the
horizon. Scenarios are archived as JSON documents with an explicit
schema_version; quantities may be numbers (hours / bytes) or strings with
unit suffixes (h, kh, Mh, my and B...TB). Parsing is strict: unknown keys
and out-of-range values fail with the offending path named.

Normalization is canonical: `Scenario.to_dict()` resolves every unit and
default, and re-parsing that echo yields an identical scenario.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .costs import Tariff
from .errors import ValidationError
from .risks import GlitchModel, RateShock, SectorModel, ServerModel, SpanShock
from .state import (
    FIXITY_FULL,
    FIXITY_HASH,
    RANDOM,
    SYSTEMATIC,
    AuditPolicy,
    ConstantSize,
    DocAuditPolicy,
    DocumentSpec,
    LogNormalSize,
    ProbePolicy,
    RepairPolicy,
)
from .units import DEFAULT_BLOCK_SIZE, METRIC_YEAR, parse_size, parse_time

SCHEMA_VERSION = 1

DEFAULT_DOC_SIZE = 5 * 2**20  # five 1 MB blocks
DEFAULT_TARIFF = {
    "storage": [[None, 0.02]],
    "ingress": [[None, 0.0]],
    "egress": [[None, 0.09]],
}

_STRATEGY_ALIASES = {
    "systematic": SYSTEMATIC,
    SYSTEMATIC: SYSTEMATIC,
    "random": RANDOM,
    RANDOM: RANDOM,
}


@dataclass(frozen=True)
class Scenario:
    """Immutable, fully validated world description."""

    documents: DocumentSpec
    target_copies: int
    sector: SectorModel
    glitches: tuple
    server: ServerModel | None
    shocks: tuple
    audit: AuditPolicy
    repair: RepairPolicy
    tariff: Tariff
    horizon: float
    label: str = ""
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        """Canonical normalized form: units resolved, defaults explicit."""
        size = self.documents.size
        if isinstance(size, ConstantSize):
            size_doc = {"constant": size.bytes}
        else:
            size_doc = {"lognormal": {"median": size.median_bytes, "sigma": size.sigma}}
        doc = {
            "schema_version": self.schema_version,
            "label": self.label,
            "documents": {
                "count": self.documents.count,
                "size": size_doc,
                "fragility": self.documents.fragility,
            },
            "copies": self.target_copies,
            "sector": {
                "half_life": None
                if math.isinf(self.sector.block_half_life)
                else self.sector.block_half_life,
                "block_size": self.sector.block_size,
            },
            "glitches": [
                {
                    "arrival_half_life": g.arrival_half_life,
                    "duration": "inf" if math.isinf(g.duration) else g.duration,
                    "multiplier": g.multiplier,
                }
                for g in self.glitches
            ],
            "server": "immortal"
            if self.server is None
            else {"half_life": self.server.lifetime_half_life},
            "shocks": [self._shock_dict(s) for s in self.shocks],
            "audit": {
                "documents": "none"
                if self.audit.doc_audit is None
                else {
                    "cycle": self.audit.doc_audit.cycle,
                    "segments": self.audit.doc_audit.segments,
                    "strategy": self.audit.doc_audit.strategy,
                    "fixity": self.audit.doc_audit.fixity,
                },
                "server_probe": "none"
                if self.audit.server_probe is None
                else {
                    "interval": self.audit.server_probe.interval,
                    "probe_count": self.audit.server_probe.probe_count,
                },
            },
            "repair": {"repopulation_delay": self.repair.repopulation_delay},
            "tariff": {
                "storage": [list(t) for t in self.tariff.storage],
                "ingress": [list(t) for t in self.tariff.ingress],
                "egress": [list(t) for t in self.tariff.egress],
            },
            "horizon": self.horizon,
        }
        return doc

    @staticmethod
    def _shock_dict(shock) -> dict:
        if isinstance(shock, SpanShock):
            return {
                "kind": "span",
                "arrival_half_life": shock.arrival_half_life,
                "span": shock.span,
            }
        return {
            "kind": "rate",
            "arrival_half_life": shock.arrival_half_life,
            "duration": "inf" if math.isinf(shock.duration) else shock.duration,
            "multiplier": shock.multiplier,
            "scope": "all" if shock.scope_size is None else {"subset": shock.scope_size},
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


# ---------------------------------------------------------------------------
# Parsing helpers


def _require_mapping(value, path):
    if not isinstance(value, dict):
        raise ValidationError(path, f"expected an object, got {type(value).__name__}")
    return value


def _check_keys(mapping, allowed, path):
    for key in mapping:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ValidationError(where, "unknown key")


def _get_int(mapping, key, path, minimum=None, default=None, required=False):
    where = f"{path}.{key}" if path else key
    if key not in mapping:
        if required:
            raise ValidationError(where, "missing required field")
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(where, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ValidationError(where, f"must be >= {minimum}, got {value}")
    return value


def _get_number(mapping, key, path, minimum=None, default=None, required=False):
    where = f"{path}.{key}" if path else key
    if key not in mapping:
        if required:
            raise ValidationError(where, "missing required field")
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(where, f"expected a number, got {value!r}")
    if minimum is not None and value < minimum:
        raise ValidationError(where, f"must be >= {minimum}, got {value}")
    return float(value)


def _get_time(mapping, key, path, default=None, required=False, positive=True, allow_inf=False):
    where = f"{path}.{key}" if path else key
    if key not in mapping:
        if required:
            raise ValidationError(where, "missing required field")
        return default
    hours = parse_time(mapping[key], where)
    if positive and not hours > 0:
        raise ValidationError(where, f"must be positive, got {mapping[key]!r}")
    if not positive and hours < 0:
        raise ValidationError(where, f"must be >= 0, got {mapping[key]!r}")
    if math.isinf(hours) and not allow_inf:
        raise ValidationError(where, "must be finite")
    return hours


def _parse_documents(doc, path="documents") -> DocumentSpec:
    doc = _require_mapping(doc, path)
    _check_keys(doc, {"count", "size", "fragility"}, path)
    count = _get_int(doc, "count", path, minimum=1, required=True)
    fragility = _get_number(doc, "fragility", path, minimum=1.0, default=1.0)
    size_value = doc.get("size", DEFAULT_DOC_SIZE)
    size_path = f"{path}.size"
    if isinstance(size_value, dict):
        _check_keys(size_value, {"constant", "lognormal"}, size_path)
        if "constant" in size_value and "lognormal" in size_value:
            raise ValidationError(size_path, "give either constant or lognormal, not both")
        if "constant" in size_value:
            size = ConstantSize(parse_size(size_value["constant"], f"{size_path}.constant"))
        elif "lognormal" in size_value:
            ln = _require_mapping(size_value["lognormal"], f"{size_path}.lognormal")
            _check_keys(ln, {"median", "sigma"}, f"{size_path}.lognormal")
            if "median" not in ln or "sigma" not in ln:
                raise ValidationError(f"{size_path}.lognormal", "median and sigma are required")
            sigma = ln["sigma"]
            if isinstance(sigma, bool) or not isinstance(sigma, (int, float)) or sigma <= 0:
                raise ValidationError(f"{size_path}.lognormal.sigma", "must be a positive number")
            size = LogNormalSize(
                parse_size(ln["median"], f"{size_path}.lognormal.median"), float(sigma)
            )
        else:
            raise ValidationError(size_path, "give constant or lognormal")
    else:
        size = ConstantSize(parse_size(size_value, size_path))
    return DocumentSpec(count=count, size=size, fragility=fragility)


def _parse_sector(doc, path="sector") -> SectorModel:
    doc = _require_mapping(doc, path)
    _check_keys(doc, {"half_life", "block_size"}, path)
    if "half_life" not in doc:
        raise ValidationError(f"{path}.half_life", "missing required field")
    raw = doc["half_life"]
    if raw is None or raw == "immortal":
        half_life = math.inf
    else:
        half_life = _get_time(doc, "half_life", path, required=True, allow_inf=True)
    block_size = parse_size(doc.get("block_size", DEFAULT_BLOCK_SIZE), f"{path}.block_size")
    return SectorModel(block_half_life=half_life, block_size=block_size)


def _parse_glitches(items, path="glitches") -> tuple:
    if not isinstance(items, list):
        raise ValidationError(path, "expected a list")
    out = []
    for i, item in enumerate(items):
        where = f"{path}[{i}]"
        item = _require_mapping(item, where)
        _check_keys(item, {"arrival_half_life", "duration", "multiplier"}, where)
        out.append(
            GlitchModel(
                arrival_half_life=_get_time(item, "arrival_half_life", where, required=True),
                duration=_get_time(item, "duration", where, required=True, positive=False, allow_inf=True),
                multiplier=_get_number(item, "multiplier", where, minimum=1.0, required=True),
            )
        )
    return tuple(out)


def _parse_server(doc, path="server") -> ServerModel | None:
    if doc is None or doc == "immortal":
        return None
    doc = _require_mapping(doc, path)
    _check_keys(doc, {"half_life"}, path)
    return ServerModel(lifetime_half_life=_get_time(doc, "half_life", path, required=True))


def _parse_shocks(items, path="shocks") -> tuple:
    if not isinstance(items, list):
        raise ValidationError(path, "expected a list")
    out = []
    for i, item in enumerate(items):
        where = f"{path}[{i}]"
        item = _require_mapping(item, where)
        kind = item.get("kind")
        if kind == "span":
            _check_keys(item, {"kind", "arrival_half_life", "span"}, where)
            out.append(
                SpanShock(
                    arrival_half_life=_get_time(item, "arrival_half_life", where, required=True),
                    span=_get_int(item, "span", where, minimum=1, required=True),
                )
            )
        elif kind == "rate":
            _check_keys(item, {"kind", "arrival_half_life", "duration", "multiplier", "scope"}, where)
            scope = item.get("scope", "all")
            if scope == "all":
                scope_size = None
            elif isinstance(scope, dict):
                _check_keys(scope, {"subset"}, f"{where}.scope")
                scope_size = _get_int(scope, "subset", f"{where}.scope", minimum=1, required=True)
            else:
                raise ValidationError(f"{where}.scope", f"expected 'all' or {{'subset': n}}, got {scope!r}")
            out.append(
                RateShock(
                    arrival_half_life=_get_time(item, "arrival_half_life", where, required=True),
                    duration=_get_time(item, "duration", where, required=True, positive=False, allow_inf=True),
                    multiplier=_get_number(item, "multiplier", where, minimum=1.0, required=True),
                    scope_size=scope_size,
                )
            )
        else:
            raise ValidationError(f"{where}.kind", f"expected 'rate' or 'span', got {kind!r}")
    return tuple(out)


def _parse_audit(doc, path="audit") -> AuditPolicy:
    doc = _require_mapping(doc, path)
    _check_keys(doc, {"documents", "server_probe"}, path)
    doc_audit = None
    docs_value = doc.get("documents", "none")
    if docs_value not in (None, "none"):
        where = f"{path}.documents"
        docs_value = _require_mapping(docs_value, where)
        _check_keys(docs_value, {"cycle", "segments", "strategy", "fixity"}, where)
        strategy_raw = docs_value.get("strategy", "systematic")
        if strategy_raw == "none":
            doc_audit = None
        else:
            strategy = _STRATEGY_ALIASES.get(strategy_raw)
            if strategy is None:
                raise ValidationError(f"{where}.strategy", f"unknown strategy {strategy_raw!r}")
            fixity = docs_value.get("fixity", FIXITY_FULL)
            if fixity not in (FIXITY_FULL, FIXITY_HASH):
                raise ValidationError(f"{where}.fixity", f"expected 'full' or 'hash', got {fixity!r}")
            doc_audit = DocAuditPolicy(
                cycle=_get_time(docs_value, "cycle", where, required=True),
                segments=_get_int(docs_value, "segments", where, minimum=1, default=1),
                strategy=strategy,
                fixity=fixity,
            )
    probe = None
    probe_value = doc.get("server_probe", "none")
    if probe_value not in (None, "none"):
        where = f"{path}.server_probe"
        probe_value = _require_mapping(probe_value, where)
        _check_keys(probe_value, {"interval", "probe_count"}, where)
        probe = ProbePolicy(
            interval=_get_time(probe_value, "interval", where, required=True),
            probe_count=_get_int(probe_value, "probe_count", where, minimum=1, default=3),
        )
    return AuditPolicy(doc_audit=doc_audit, server_probe=probe)


def _parse_tariff(doc, path="tariff") -> Tariff:
    doc = _require_mapping(doc, path)
    _check_keys(doc, {"storage", "ingress", "egress"}, path)

    def tiers(key):
        where = f"{path}.{key}"
        raw = doc.get(key, DEFAULT_TARIFF[key])
        if not isinstance(raw, list) or not raw:
            raise ValidationError(where, "expected a non-empty list of [bound_gb, price] pairs")
        parsed = []
        for i, pair in enumerate(raw):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ValidationError(f"{where}[{i}]", "expected a [bound_gb, price] pair")
            bound, price = pair
            if bound is not None and (isinstance(bound, bool) or not isinstance(bound, (int, float))):
                raise ValidationError(f"{where}[{i}]", "bound must be a number or null")
            if isinstance(price, bool) or not isinstance(price, (int, float)) or price < 0:
                raise ValidationError(f"{where}[{i}]", "price must be a number >= 0")
            parsed.append((float(bound) if bound is not None else None, float(price)))
        return tuple(parsed)

    try:
        return Tariff(storage=tiers("storage"), ingress=tiers("ingress"), egress=tiers("egress"))
    except ValidationError:
        raise
    except Exception as exc:
        raise ValidationError(path, str(exc)) from exc


_TOP_KEYS = {
    "schema_version",
    "label",
    "documents",
    "copies",
    "sector",
    "glitches",
    "server",
    "shocks",
    "audit",
    "repair",
    "tariff",
    "horizon",
}


def parse_scenario_dict(doc: dict) -> Scenario:
    """Validate a scenario document and resolve units and defaults."""
    doc = _require_mapping(doc, "")
    _check_keys(doc, _TOP_KEYS, "")
    version = _get_int(doc, "schema_version", "", default=SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValidationError("schema_version", f"unsupported version {version}")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise ValidationError("label", "expected a string")
    if "documents" not in doc:
        raise ValidationError("documents", "missing required field")
    if "sector" not in doc:
        raise ValidationError("sector", "missing required field")
    documents = _parse_documents(doc["documents"])
    copies = _get_int(doc, "copies", "", minimum=1, required=True)
    sector = _parse_sector(doc["sector"])
    glitches = _parse_glitches(doc.get("glitches", []))
    server = _parse_server(doc.get("server", "immortal"))
    shocks = _parse_shocks(doc.get("shocks", []))
    audit = _parse_audit(doc.get("audit", {}))
    repair_doc = _require_mapping(doc.get("repair", {}), "repair")
    _check_keys(repair_doc, {"repopulation_delay"}, "repair")
    repair = RepairPolicy(
        repopulation_delay=_get_time(
            repair_doc, "repopulation_delay", "repair", default=0.0, positive=False
        )
    )
    tariff = _parse_tariff(doc.get("tariff", {}))
    horizon = _get_time(doc, "horizon", "", required=True)
    return Scenario(
        documents=documents,
        target_copies=copies,
        sector=sector,
        glitches=glitches,
        server=server,
        shocks=shocks,
        audit=audit,
        repair=repair,
        tariff=tariff,
        horizon=horizon,
        label=label,
        schema_version=version,
    )


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError("", f"not valid JSON: {exc}") from exc
    return parse_scenario_dict(doc)


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# ---------------------------------------------------------------------------
# Presets


def preset_encryption_keys() -> Scenario:
    """Replicated key custody: a tiny collection on its own server set.

    Keys are small, so block-level decay is negligible and the dominant
    risks are organizational shocks that take out whole custodians at once.
    Four copies on administratively separate servers, audited monthly.
    """
    return parse_scenario_dict(
        {
            "label": "encryption-keys (separate administrative domains)",
            "documents": {"count": 100, "size": "1 MB"},
            "copies": 4,
            "sector": {"half_life": "immortal"},
            "server": {"half_life": "10 my"},
            "shocks": [{"kind": "span", "arrival_half_life": "5 my", "span": 2}],
            "audit": {
                "documents": {
                    "cycle": f"{METRIC_YEAR / 12.0} h",
                    "segments": 1,
                    "strategy": "systematic",
                },
                "server_probe": {"interval": f"{METRIC_YEAR / 12.0} h", "probe_count": 3},
            },
            "horizon": "30 my",
        }
    )


def preset_format_obsolescence(reader_count: int, reader_half_life: float = 12 * METRIC_YEAR, shock=None, probe_interval: float = METRIC_YEAR) -> Scenario:
    """Format readability modeled as server survival.

    Each "server" is an independent reader implementation for one format;
    a reader that can no longer be executed has failed, and the format is
    lost when no reader remains. Auditing means running each reader against
    the test corpus, which maps onto liveness probes. Reader half-lives
    default to twelve metric years, anchored to typical OS-revision support
    lifetimes. Block- and glitch-level risks do not apply.
    """
    if reader_count < 1:
        raise ValidationError("copies", f"reader_count must be >= 1, got {reader_count}")
    shocks = []
    if shock is not None:
        shocks.append(Scenario._shock_dict(shock))
    return parse_scenario_dict(
        {
            "label": f"format-obsolescence ({reader_count} independent readers)",
            "documents": {"count": 100, "size": "1 MB"},
            "copies": reader_count,
            "sector": {"half_life": "immortal"},
            "server": {"half_life": reader_half_life},
            "shocks": shocks,
            "audit": {
                "server_probe": {"interval": probe_interval, "probe_count": 3},
            },
            "horizon": "30 my",
        }
    )
