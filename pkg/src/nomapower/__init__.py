"""Minimum-power transmit allocation for multi-cell uplink NOMA with
imperfect SIC: centralized closed-form and distributed iterative solvers,
plus a seeded Monte Carlo experiment harness."""

__version__ = "0.1.0"

from .channel import (
    ChannelRealization,
    Topology,
    drop_users,
    pathloss_db,
    place_base_stations,
    realize_channel,
)
from .experiments import (
    ExperimentPlan,
    ProbeResult,
    ResultTable,
    TrialRecord,
    run_convergence_probe,
    run_outage_sweep,
    run_sum_power_sweep,
    run_trials,
)
from .interference import (
    CellSubsystem,
    InterferenceSystem,
    achieved_sinr,
    build_cell_subsystem,
    build_global_system,
    build_oma_system,
    oma_sinr_target,
)
from .model import GlobalIndexMap, PowerAllocation, SystemParams
from .runconfig import ConfigError, RunConfig, load_config
from .solvers import (
    ConvergenceTrace,
    SolveOutcome,
    SolveStatus,
    SpectralEstimate,
    solve_centralized,
    solve_distributed,
    solve_fixed_point_oracle,
    spectral_radius,
)
from .units import db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm

__all__ = [
    "__version__",
    "ChannelRealization", "Topology", "drop_users", "pathloss_db",
    "place_base_stations", "realize_channel",
    "ExperimentPlan", "ProbeResult", "ResultTable", "TrialRecord",
    "run_convergence_probe", "run_outage_sweep", "run_sum_power_sweep", "run_trials",
    "CellSubsystem", "InterferenceSystem", "achieved_sinr",
    "build_cell_subsystem", "build_global_system", "build_oma_system", "oma_sinr_target",
    "GlobalIndexMap", "PowerAllocation", "SystemParams",
    "ConfigError", "RunConfig", "load_config",
    "ConvergenceTrace", "SolveOutcome", "SolveStatus", "SpectralEstimate",
    "solve_centralized", "solve_distributed", "solve_fixed_point_oracle", "spectral_radius",
    "db_to_linear", "dbm_to_watts", "linear_to_db", "watts_to_dbm",
]
