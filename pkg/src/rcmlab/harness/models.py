"""Experiment configuration, run manifests and result tables."""

import hashlib
import json
import math
import tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from rcmlab.environment import ConductanceLaw, PositiveLaw, Speed
from rcmlab.exceptions import ConfigurationError
from rcmlab.lattice import Annulus


class ExperimentConfig(BaseModel):
    """
    One experiment, read from a flat TOML file.

    Unknown keys are rejected. Together with the code version the config
    determines every output: all randomness is derived from master_seed.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    experiment: str = "custom"

    # Conductance law
    law: PositiveLaw = PositiveLaw.CONSTANT
    p_open: float = Field(default=1.0, gt=0, le=1)
    value: float = 1.0
    low: float = 0.5
    high: float = 1.5
    shape: float = 3.0
    scale: float = 1.0
    speed: Speed = Speed.VSRW

    # Geometry
    half_width: int = Field(default=64, ge=2)
    n_grid: list[int] = Field(default_factory=lambda: [8, 16, 32, 64])
    annulus_inner: float = 1.0
    annulus_outer: float = 2.0
    mesh_radii: int = Field(default=4, ge=1)
    mesh_angles: int = Field(default=16, ge=1)
    cutoff_factor: float = Field(default=2.0, gt=0)
    delta: float = Field(default=0.5, gt=0, lt=1)

    # Seeds and sample sizes
    master_seed: int = 0
    num_envs: int = Field(default=1, ge=1)
    num_walks: int = Field(default=1000, ge=1)
    theta_seeds: int = Field(default=4, ge=1)
    sigma_horizon: float = Field(default=100.0, gt=0)
    moment_p: float = Field(default=4.0, gt=1)
    moment_q: float = Field(default=4.0, gt=1)

    # Numerics
    solver: Literal["cg", "direct"] | None = None
    solver_tol: float | None = Field(default=None, gt=0)
    heat_tol: float | None = Field(default=None, gt=0)

    # gbar: a fixed value skips the Monte Carlo estimate
    gbar: float | None = Field(default=None, gt=0)

    # Acceptance
    thm12_cap: float = Field(default=0.5, gt=0)
    thm12_slope_tolerance: float = Field(default=0.1, gt=0)
    ondiag_tolerance: float = Field(default=0.3, gt=0)
    identity_tolerance: float = Field(default=1e-2, gt=0)
    classical_tolerance: float = Field(default=0.01, gt=0)

    # Identity checks and the classical constant
    identity_radius: int = Field(default=2, ge=1)
    identity_instances: int = Field(default=10, ge=1)
    classical_radii: list[int] = Field(default_factory=lambda: [4, 8, 16, 32])

    # Heat kernel
    t_min: float = Field(default=1.0, gt=0)
    t_max: float = Field(default=100.0, gt=0)
    t_ratio: float = Field(default=2.0, gt=1)

    # Dynamic environments and the interface
    slot_length: float = Field(default=1.0, gt=0)
    num_frames: int = Field(default=16, ge=1)
    annealed_horizon: float = Field(default=20.0, gt=0)
    annealed_offsets: list[int] = Field(default_factory=lambda: [1, 2, 4, 8])
    gradient_slope_low: float = -1.7
    gradient_slope_high: float = -1.3
    potential_kind: Literal["quadratic", "cosine"] = "quadratic"
    epsilon: float = 0.0
    tilt_x: float = 0.0
    tilt_y: float = 0.0
    torus_side: int = Field(default=64, ge=4)
    interface_step: float | None = Field(default=None, gt=0)
    burn_in: int = Field(default=2000, ge=0)
    samples: int = Field(default=200, ge=2)
    spacing: int = Field(default=10, ge=1)
    num_batches: int = Field(default=10, ge=2)
    slope_tolerance: float = Field(default=0.1, gt=0)

    # Output
    output_dir: str | None = None
    format: Literal["csv", "json"] = "csv"
    threads: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_ranges(self):
        if not 0 < self.annulus_inner < self.annulus_outer:
            raise ValueError("annulus_inner must be positive and below annulus_outer")
        if any(n < 2 for n in self.n_grid) or not self.n_grid:
            raise ValueError("n_grid must be a nonempty list of integers >= 2")
        if self.t_max < self.t_min:
            raise ValueError("t_max must not be below t_min")
        return self

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        """
        Raises:
            ConfigurationError: if the file is missing, unparsable or invalid
        """
        path = Path(path)
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except FileNotFoundError as e:
            raise ConfigurationError(f"Config file not found: {path}") from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f"Config file {path} is not valid TOML: {e}") from e
        return cls.from_mapping(data, source=str(path))

    @classmethod
    def from_mapping(cls, data: dict, source: str = "<config>") -> "ExperimentConfig":
        nested = [k for k, v in data.items() if isinstance(v, dict)]
        if nested:
            raise ConfigurationError(f"{source}: config must be flat, found tables {nested}")
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigurationError(f"{source}: invalid experiment config\n{e}") from e

    def with_overrides(self, **updates) -> "ExperimentConfig":
        """A validated copy with the non-None updates applied."""
        updates = {k: v for k, v in updates.items() if v is not None}
        if not updates:
            return self
        return self.from_mapping({**self.model_dump(), **updates}, source="overrides")

    def config_hash(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def conductance_law(self) -> ConductanceLaw:
        try:
            return ConductanceLaw(
                p_open=self.p_open,
                family=self.law,
                value=self.value,
                low=self.low,
                high=self.high,
                shape=self.shape,
                scale=self.scale,
            )
        except ConfigurationError as e:
            raise ConfigurationError(f"Invalid conductance law: {e}") from e

    @property
    def homogeneous(self) -> bool:
        return self.law == PositiveLaw.CONSTANT and self.p_open == 1 and self.value == 1

    @property
    def annulus(self) -> Annulus:
        return Annulus(self.annulus_inner, self.annulus_outer)

    @property
    def n_sorted(self) -> list[int]:
        return sorted(set(self.n_grid))


class RunManifest(BaseModel):
    """Everything needed to trace a run's numbers back to its config."""

    experiment: str
    command: str
    config_hash: str
    master_seed: int
    code_version: str
    wall_time: float
    passed: bool | None = None
    estimates: dict[str, float | None] = Field(default_factory=dict)
    outputs: list[str] = Field(default_factory=list)
    tables: dict[str, list[dict]] = Field(default_factory=dict)
    notes: list[str] = Field(default_factory=list)
    config: dict = Field(default_factory=dict)


@dataclass
class ExperimentResult:
    """
    A result table plus the scalar estimates behind it.

    passed is None for runs without an acceptance criterion.
    """

    name: str
    header: tuple[str, ...]
    rows: list[tuple]
    estimates: dict[str, float | None] = field(default_factory=dict)
    passed: bool | None = None
    notes: list[str] = field(default_factory=list)

    def records(self) -> list[dict]:
        def clean(v):
            return None if isinstance(v, float) and math.isnan(v) else v

        return [
            {k: clean(v) for k, v in zip(self.header, row, strict=True)} for row in self.rows
        ]
