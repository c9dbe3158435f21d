"""Trajectories and Monte Carlo estimates."""

from dataclasses import dataclass, field

import numpy as np

from rcmlab.lattice import Site


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    A walk on [0, horizon]: the site entered at each jump time.

    aborted is set when the walk touched the window frame; the path is then
    cut at that jump.
    """

    start: Site
    horizon: float
    seed: int | None
    times: np.ndarray = field(repr=False)
    sites: np.ndarray = field(repr=False)
    aborted: bool = False

    @property
    def jump_count(self) -> int:
        return len(self.times)

    @property
    def end(self) -> Site:
        if not len(self.sites):
            return self.start
        return Site(int(self.sites[-1, 0]), int(self.sites[-1, 1]))

    def position_at(self, t: float) -> Site:
        k = int(np.searchsorted(self.times, t, side="right"))
        if k == 0:
            return self.start
        return Site(int(self.sites[k - 1, 0]), int(self.sites[k - 1, 1]))


@dataclass(frozen=True, eq=False)
class EndpointBatch:
    """
    Final state of walkers run in lock-step.

    times holds the exit time for walkers that left the stop set and the
    horizon otherwise.
    """

    starts: np.ndarray = field(repr=False)
    positions: np.ndarray = field(repr=False)
    times: np.ndarray = field(repr=False)
    jumps: np.ndarray = field(repr=False)
    aborted: np.ndarray = field(repr=False)
    exited: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.positions)

    @property
    def leak_fraction(self) -> float:
        return float(self.aborted.mean()) if self.size else 0.0

    @property
    def displacements(self) -> np.ndarray:
        return self.positions - self.starts


@dataclass(frozen=True)
class SigmaEstimate:
    """Covariance Sigma^2 of the diffusive limit with jackknife errors over environments."""

    matrix: np.ndarray
    std_errors: np.ndarray
    num_envs: int
    num_walks: int
    horizon: float
    leak_fraction: float = 0.0
    per_env: tuple[np.ndarray, ...] = field(default=(), repr=False)

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.matrix))


@dataclass(frozen=True)
class GbarEstimate:
    gbar: float
    std_error: float


@dataclass(frozen=True)
class ExitStatistics:
    mean_time: float
    std_error: float
    histogram: dict[Site, int]
    num_walks: int
    aborted: int = 0

    def frequencies(self) -> dict[Site, float]:
        total = sum(self.histogram.values())
        return {s: c / total for s, c in self.histogram.items()}


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    p_value: float
    dof: int
    pooled_cells: int = 0

    def passes(self, level: float = 0.01) -> bool:
        return self.p_value >= level
