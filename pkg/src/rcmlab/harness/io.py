"""
Result files.

Tables are CSV with leading '#' comment lines carrying the config hash and
master seed; manifests are single JSON objects; environment snapshots are
binary:

    b"RCM2ENV\\0" | version u32 | L u32 | (east, north) float64 per site

little-endian, sites row-major over x then y from (-L, -L).
"""

import csv
import logging
import struct
from pathlib import Path

import numpy as np

from rcmlab.environment import StaticEnvironment
from rcmlab.exceptions import ConfigurationError, SnapshotError

from .models import ExperimentConfig, ExperimentResult, RunManifest

logger = logging.getLogger(__name__)

SNAPSHOT_MAGIC = b"RCM2ENV\0"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<8sII")


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return " ".join(str(v) for v in value)
    return "" if value is None else str(value)


def write_table(path, result: ExperimentResult, config: ExperimentConfig) -> Path:
    """Write a result table as CSV, preceded by its provenance comments."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"# config_hash={config.config_hash()}\n")
        f.write(f"# master_seed={config.master_seed}\n")
        for key, value in result.estimates.items():
            f.write(f"# {key}={value!r}\n")
        writer = csv.writer(f)
        writer.writerow(result.header)
        for row in result.rows:
            writer.writerow([_cell(v) for v in row])
    logger.info(f"Wrote {len(result.rows)} rows to {path}")
    return path


def read_table(path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """The '#' metadata and the rows of a table written by write_table."""
    meta, lines = {}, []
    with open(path, newline="", encoding="utf-8") as f:
        for line in f:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
            else:
                lines.append(line)
    return meta, list(csv.DictReader(lines))


def write_manifest(path, manifest: RunManifest) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote manifest {path}")
    return path


def write_snapshot(path, env: StaticEnvironment) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = np.stack([env.east, env.north], axis=-1).astype("<f8")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, env.half_width))
        f.write(payload.tobytes(order="C"))
    logger.info(f"Wrote snapshot of L={env.half_width} to {path}")
    return path


def read_snapshot(path) -> StaticEnvironment:
    """
    Raises:
        SnapshotError: on a missing file, bad magic, unknown version or
            truncated payload
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise SnapshotError(f"Cannot read snapshot {path}: {e}") from e
    if len(data) < _HEADER.size:
        raise SnapshotError(f"Snapshot {path} is shorter than its header")
    magic, version, L = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotError(f"{path} is not an environment snapshot (magic {magic!r})")
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(f"Snapshot {path} has unsupported version {version}")
    side = 2 * L + 1
    expected = _HEADER.size + side * side * 2 * 8
    if len(data) != expected:
        raise SnapshotError(
            f"Snapshot {path} holds {len(data)} bytes, expected {expected} for L={L}"
        )
    payload = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(side, side, 2)
    try:
        east, north = payload[..., 0].astype(float), payload[..., 1].astype(float)
        return StaticEnvironment.from_arrays(east, north)
    except ConfigurationError as e:
        raise SnapshotError(f"Snapshot {path} holds an invalid environment: {e}") from e
