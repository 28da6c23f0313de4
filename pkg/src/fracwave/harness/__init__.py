from .cli import add_noise, main, run_poles, run_reconstruct, run_simulate, run_transform, run_verify
from .config import SCHEMA, ExperimentConfig, load_config, parse_config
from .io import emit_plot, read_trace, write_trace

__all__ = [
    "SCHEMA",
    "ExperimentConfig",
    "add_noise",
    "emit_plot",
    "load_config",
    "main",
    "parse_config",
    "read_trace",
    "run_poles",
    "run_reconstruct",
    "run_simulate",
    "run_transform",
    "run_verify",
    "write_trace",
]
