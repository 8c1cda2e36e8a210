"""Example setups, decay fits, reports and convergence studies."""

from .config import EXAMPLES, REDUCED, ExperimentConfig
from .convergence import (
    ConvergenceRow,
    ConvergenceTable,
    convergence_study,
    parse_levels,
    probe_grid,
    sample_on_probes,
)
from .fitting import DecayFit, fit_decay_rate
from .runner import (
    SUMMARY_SCHEMA,
    ExperimentResult,
    build_mesh,
    conservation_summary,
    emit_report,
    read_snapshot_csv,
    run_example,
    summary_dict,
    validate_summary,
    write_series_csv,
    write_snapshot_csv,
)

__all__ = [
    "EXAMPLES",
    "REDUCED",
    "ExperimentConfig",
    "ConvergenceRow",
    "ConvergenceTable",
    "convergence_study",
    "parse_levels",
    "probe_grid",
    "sample_on_probes",
    "DecayFit",
    "fit_decay_rate",
    "SUMMARY_SCHEMA",
    "ExperimentResult",
    "build_mesh",
    "conservation_summary",
    "emit_report",
    "read_snapshot_csv",
    "run_example",
    "summary_dict",
    "validate_summary",
    "write_series_csv",
    "write_snapshot_csv",
]
