from .io import read_snapshot, read_table, write_manifest, write_snapshot, write_table
from .models import ExperimentConfig, ExperimentResult, RunManifest

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "RunManifest",
    "read_snapshot",
    "read_table",
    "write_manifest",
    "write_snapshot",
    "write_table",
]
