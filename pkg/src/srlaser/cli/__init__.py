"""Command-line harness: configuration, sweeps, result files and figures."""

from .config import Axis, SweepSpec, load_config, loads_config, resolve_params
from .figures import emit_figures
from .main import main
from .sweep import ResultRecord, run_sweep

__all__ = ["Axis", "ResultRecord", "SweepSpec", "emit_figures", "load_config", "loads_config",
           "main", "resolve_params", "run_sweep"]
