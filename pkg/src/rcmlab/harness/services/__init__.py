from . import dynamic, static
from .pool import run_tasks
from .runner import code_version, output_dir, run_experiment
from .static import (
    decreasing_top_half,
    environment_summary,
    green_query,
    potential_query,
    resolve_gbar,
    sample_env,
)

__all__ = [
    "code_version",
    "decreasing_top_half",
    "dynamic",
    "environment_summary",
    "green_query",
    "output_dir",
    "potential_query",
    "resolve_gbar",
    "run_experiment",
    "run_tasks",
    "sample_env",
    "static",
]
