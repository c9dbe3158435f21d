"""Heat-kernel slices and propagation results."""

from dataclasses import dataclass, field

import numpy as np

from rcmlab.lattice import Site
from rcmlab.operator import Generator


@dataclass(frozen=True, eq=False)
class Propagation:
    """
    Distributions of the walk started at base, at each grid time.

    states[k] is the mass vector P_base[X_{t_k} = .] over the generator's
    domain; integrals[k] is the exact time integral of that vector over
    (t_{k-1}, t_k] with t_{-1} = 0, up to series truncation.
    """

    generator: Generator
    base: Site
    times: tuple[float, ...]
    states: tuple[np.ndarray, ...] = field(repr=False)
    integrals: tuple[np.ndarray, ...] = field(repr=False)
    truncation: tuple[float, ...] = ()

    def density(self, k: int) -> np.ndarray:
        """p_{t_k}(base, .) over the domain."""
        return self.states[k] / self.generator.theta

    def density_at(self, k: int, s) -> float:
        idx = self.generator.index.get(Site(*s))
        return 0.0 if idx is None else float(self.density(k)[idx])

    def integrated_density_at(self, k: int, s) -> float:
        """Integral of p_t(base, s) over (t_{k-1}, t_k]."""
        idx = self.generator.index.get(Site(*s))
        if idx is None:
            return 0.0
        return float(self.integrals[k][idx] / self.generator.theta[idx])

    def leak(self, k: int) -> float:
        return float(max(0.0, 1.0 - self.states[k].sum()))


@dataclass(frozen=True, eq=False)
class HeatKernelSlice:
    """p_t(base, .) on a finite domain with its error bookkeeping."""

    base: Site
    time: float
    sites: tuple[Site, ...]
    density: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    truncation_error: float = 0.0
    leak: float = 0.0
    index: dict[Site, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            object.__setattr__(self, "index", {s: k for k, s in enumerate(self.sites)})

    def __call__(self, s) -> float:
        k = self.index.get(Site(*s))
        return 0.0 if k is None else float(self.density[k])

    def mass(self) -> float:
        return float(self.density @ self.theta)


@dataclass(frozen=True)
class GaussianReport:
    """
    Fitted constants of p_t(0, y) <= C t^-1 exp(-c |y|^2 / t) over |y| <= t,
    one C per trial c, with the site attaining each maximum.
    """

    time: float
    trial_c: tuple[float, ...]
    fitted_C: tuple[float, ...]
    worst_sites: tuple[Site, ...]
    far_regime_ok: bool
    far_regime_sites: int
    leak: float
