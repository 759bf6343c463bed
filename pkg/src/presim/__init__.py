"""presim: durability and cost analysis for replicated document collections.

A seeded discrete-event Monte-Carlo simulator for long-horizon storage of
document collections under four layered threats (block corruption,
environmental glitches, server failures, correlated shocks), together with
the preservation policies that counter them (replication, segmented
auditing and repair, liveness probing, server replacement) and the tariff
arithmetic to price them. Closed-form analytics double as independent
oracles for the simulator.
"""

from .analytics import (
    FragilityProfile,
    byzantine_min_replicas,
    compression_reduces_loss,
    expected_unaudited_fraction,
    fragility_equivalent,
    p_doc_loss_single_copy,
    p_doc_loss_unaudited,
)
from .costs import CostLedger, Tariff, tiered_price
from .engine import (
    Engine,
    EventQueue,
    EventTrace,
    RngStream,
    SimClock,
    create_engine,
    draw_exponential,
    draw_exponential_batch,
)
from .errors import ConfigurationError, SimulationLogicError, ValidationError
from .risks import (
    GlitchModel,
    RateShock,
    SectorModel,
    ServerModel,
    SpanShock,
    apply_span_shock,
    copy_corruption_hazard,
    effective_server_hazard,
    hazard_from_half_life,
    resample_on_rate_change,
)
from .runner import (
    Aggregate,
    ResultTable,
    RunResult,
    SearchResult,
    derive_run_seed,
    policy_search,
    run_once,
    run_replications,
    sweep,
    write_results,
)
from .scenario import (
    Scenario,
    load_scenario,
    parse_scenario,
    parse_scenario_dict,
    preset_encryption_keys,
    preset_format_obsolescence,
)
from .state import (
    AuditPolicy,
    AuditReport,
    CollectionState,
    ConstantSize,
    DocAuditPolicy,
    DocumentSpec,
    LogNormalSize,
    LossReport,
    ProbePolicy,
    RepairPolicy,
    ServerState,
    audit_documents,
    build_segments,
    loss_metrics,
    probe_server,
    replace_server,
)
from .units import GB, MB, MEGAHOUR, METRIC_YEAR, MONTH_HOURS

__version__ = "0.1.0"
