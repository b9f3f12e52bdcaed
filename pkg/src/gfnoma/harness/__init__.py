from .config import ConfigError, ScenarioConfig, dump_config, load_config, parse_overrides
from .montecarlo import (
    PointSummary,
    Scenario,
    TrialReport,
    eigen_profiles,
    run_point,
    run_sweep,
    run_trial,
    summarize,
    trial_rng,
)
from .report import CSV_COLUMNS, emit_csv, emit_eigen_csv, format_csv, read_csv

__all__ = [
    "CSV_COLUMNS", "ConfigError", "PointSummary", "Scenario", "ScenarioConfig", "TrialReport",
    "dump_config", "eigen_profiles", "emit_csv", "emit_eigen_csv", "format_csv", "load_config",
    "parse_overrides", "read_csv", "run_point", "run_sweep", "run_trial", "summarize", "trial_rng",
]
