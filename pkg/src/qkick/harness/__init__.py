from .config import ConfigError, ExperimentConfig, validate_config
from .runner import RunSummary, run_single, run_sweep

__all__ = ["ConfigError", "ExperimentConfig", "RunSummary", "run_single", "run_sweep",
           "validate_config"]
