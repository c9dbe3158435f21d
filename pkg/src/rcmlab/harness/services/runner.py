import logging
import math
import time
from collections.abc import Callable
from importlib import metadata
from pathlib import Path

from django.conf import settings

from ..io import write_manifest, write_table
from ..models import ExperimentConfig, ExperimentResult, RunManifest

logger = logging.getLogger(__name__)


def code_version() -> str:
    try:
        return metadata.version("rcm-lab")
    except metadata.PackageNotFoundError:
        return "unknown"


def _clean(estimates: dict) -> dict[str, float | None]:
    out = {}
    for key, value in estimates.items():
        if value is None or isinstance(value, bool):
            out[key] = None if value is None else float(value)
        elif isinstance(value, (int, float)):
            out[key] = None if math.isnan(value) else float(value)
    return out


def output_dir(config: ExperimentConfig, out: str | Path | None = None) -> Path:
    """--out, then output_dir from the config, then the RCM_LAB_OUTPUT_DIR setting."""
    return Path(out or config.output_dir or settings.RCM_LAB_OUTPUT_DIR)


def run_experiment(
    command: str,
    fn: Callable[..., ExperimentResult],
    config: ExperimentConfig,
    out: str | Path | None = None,
    threads: int | None = None,
) -> tuple[ExperimentResult, list[Path]]:
    """
    Run one pipeline and write its table and manifest.

    csv: <name>.csv plus <name>.manifest.json
    json: <name>.json, the manifest with the table embedded

    Returns:
        (result, paths written)
    """
    directory = output_dir(config, out)
    threads = threads or config.threads
    logger.info(
        f"Running {command} (config {config.config_hash()[:12]}, seed {config.master_seed})"
    )
    started = time.perf_counter()
    result = fn(config, threads=threads)
    wall_time = time.perf_counter() - started

    paths = []
    manifest = RunManifest(
        experiment=config.experiment,
        command=command,
        config_hash=config.config_hash(),
        master_seed=config.master_seed,
        code_version=code_version(),
        wall_time=wall_time,
        passed=result.passed,
        estimates=_clean(result.estimates),
        notes=result.notes,
        config=config.model_dump(mode="json"),
    )
    if config.format == "csv":
        table = write_table(directory / f"{result.name}.csv", result, config)
        paths.append(table)
        manifest.outputs.append(table.name)
        paths.append(write_manifest(directory / f"{result.name}.manifest.json", manifest))
    else:
        manifest.tables[result.name] = result.records()
        manifest.outputs.append(f"{result.name}.json")
        paths.append(write_manifest(directory / f"{result.name}.json", manifest))

    for note in result.notes:
        logger.warning(f"{command}: {note}")
    logger.info(f"{command} finished in {wall_time:.1f}s, passed={result.passed}")
    return result, paths
