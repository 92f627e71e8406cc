"""Minimum-time-span scheduling for network-coded two-way relay networks.

The package computes how a relay should interleave coded broadcasts and
one-directional forwarding to deliver both sources' data as fast as
possible, under three channel models: fixed link capacities (closed-form
schedules), finitely many random rate states (assumed-state policies), and
Rayleigh fading (water-filling power allocation with causal or noncausal
channel knowledge, plus Monte-Carlo strategy comparisons).
"""

from .errors import (
    ConfigError,
    DegenerateBacklogError,
    DomainError,
    RelaySpanError,
    SimulationGuardError,
)
from .rates import (
    Backlog,
    LinkCapacities,
    RatePoint,
    RateTriple,
    cross_point,
    forwarding_rates,
    region_vertices,
)
from .schedule import (
    Schedule,
    closed_form_span,
    lp_oracle,
    optimal_schedule,
    schedule_for_theta3,
    time_span,
)
from .finite_state import (
    AlphaVector,
    FiniteStateModel,
    RateLevels,
    StatePolicy,
    alpha_coefficients,
    enumerate_states,
    expected_rate,
    optimal_policy,
    simulate_finite_state,
    simulate_spans,
    success_probability,
    success_set,
)
from .power import (
    CausalDecision,
    FadingConfig,
    GainTape,
    PowerAllocation,
    PowerConfig,
    causal_allocate_slot,
    draw_slot_gains,
    fwd_slot_throughput,
    nc_slot_throughput,
    noncausal_min_slots,
    waterfill,
)
from .relay import (
    TRACE_CSV_HEADER,
    Knowledge,
    Mode,
    RelayBuffers,
    SlotRecord,
    Strategy,
    run_relay,
    write_trace_csv,
)
from .harness import (
    SUMMARY_CSV_HEADER,
    ExperimentConfig,
    PointSpans,
    SummaryRow,
    dbm_to_watts,
    mbytes_to_bits,
    power_sweep,
    power_sweep_spans,
    ratio_sweep,
    ratio_sweep_spans,
    summarize,
    trial_rng,
    write_summary_csv,
)

__version__ = "0.1.0"

__all__ = [
    "RelaySpanError",
    "DomainError",
    "DegenerateBacklogError",
    "ConfigError",
    "SimulationGuardError",
    "LinkCapacities",
    "Backlog",
    "RateTriple",
    "RatePoint",
    "forwarding_rates",
    "region_vertices",
    "cross_point",
    "Schedule",
    "optimal_schedule",
    "time_span",
    "closed_form_span",
    "schedule_for_theta3",
    "lp_oracle",
    "RateLevels",
    "FiniteStateModel",
    "StatePolicy",
    "AlphaVector",
    "enumerate_states",
    "success_set",
    "success_probability",
    "alpha_coefficients",
    "optimal_policy",
    "expected_rate",
    "simulate_finite_state",
    "simulate_spans",
    "PowerConfig",
    "FadingConfig",
    "PowerAllocation",
    "CausalDecision",
    "GainTape",
    "draw_slot_gains",
    "nc_slot_throughput",
    "fwd_slot_throughput",
    "waterfill",
    "noncausal_min_slots",
    "causal_allocate_slot",
    "Strategy",
    "Knowledge",
    "Mode",
    "RelayBuffers",
    "SlotRecord",
    "run_relay",
    "write_trace_csv",
    "TRACE_CSV_HEADER",
    "SUMMARY_CSV_HEADER",
    "ExperimentConfig",
    "PointSpans",
    "SummaryRow",
    "dbm_to_watts",
    "mbytes_to_bits",
    "trial_rng",
    "power_sweep",
    "power_sweep_spans",
    "ratio_sweep",
    "ratio_sweep_spans",
    "summarize",
    "write_summary_csv",
    "__version__",
]
