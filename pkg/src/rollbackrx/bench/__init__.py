from .analysis import (
    DEFAULT_TAUS,
    FAIL,
    OperatingSnr,
    TauTableRow,
    bler_curve,
    operating_snr,
    rederive_bler_for_tau,
    run_operating_snr,
    tau_sweep,
)
from .latency import build_latency_components, detector_fraction, latency_bench
from .results import (
    LATENCY_COLUMNS,
    RESULT_COLUMNS,
    TAU_COLUMNS,
    ParseError,
    read_results,
    results_rows,
    write_latency_table,
    write_results,
    write_tau_table,
)
from .scenarios import (
    ARBITRATED,
    RECEIVERS,
    Scenario,
    SweepConfig,
    load_registry,
    parse_surrogate,
)
from .sweep import (
    ScenarioRun,
    SimContext,
    SlotRecord,
    SnrPointResult,
    StreamScore,
    aggregate_records,
    run_scenario,
    select_stream,
    silent_failure_monitor,
    simulate_slot,
)

__all__ = [
    "ARBITRATED",
    "DEFAULT_TAUS",
    "FAIL",
    "LATENCY_COLUMNS",
    "OperatingSnr",
    "ParseError",
    "RECEIVERS",
    "RESULT_COLUMNS",
    "Scenario",
    "ScenarioRun",
    "SimContext",
    "SlotRecord",
    "SnrPointResult",
    "StreamScore",
    "SweepConfig",
    "TAU_COLUMNS",
    "TauTableRow",
    "aggregate_records",
    "bler_curve",
    "build_latency_components",
    "detector_fraction",
    "latency_bench",
    "load_registry",
    "operating_snr",
    "parse_surrogate",
    "read_results",
    "rederive_bler_for_tau",
    "results_rows",
    "run_operating_snr",
    "run_scenario",
    "select_stream",
    "silent_failure_monitor",
    "simulate_slot",
    "tau_sweep",
    "write_latency_table",
    "write_results",
    "write_tau_table",
]
