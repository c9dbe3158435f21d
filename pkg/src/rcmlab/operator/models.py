"""Generators, solve reports and site-indexed results."""

from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from scipy import sparse

from rcmlab.environment import Speed, StaticEnvironment
from rcmlab.lattice import Site


class Boundary(StrEnum):
    """How the walk is treated when it leaves the domain."""

    DIRICHLET = "dirichlet"
    REFLECTING = "reflecting"


class SolverMethod(StrEnum):
    CG = "cg"
    DIRECT = "direct"


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one sparse solve. residual is relative to the right-hand side."""

    residual: float
    iterations: int
    tol: float
    wall_time: float
    method: SolverMethod = SolverMethod.CG
    size: int = 0

    @property
    def converged(self) -> bool:
        return self.residual <= self.tol


@dataclass(frozen=True, eq=False)
class Generator:
    """
    L_theta restricted to a finite domain.

    With stiffness K (diagonal mu, off-diagonal -omega between domain sites)
    and exterior coupling B (omega from domain sites to outside neighbours),

        (L f)(x) = (-(K f_domain) + B f_exterior)(x) / theta(x).

    K is symmetric; detailed balance theta(x) rate(x, y) = omega({x, y}) is
    built into this form. With a reflecting boundary the diagonal only counts
    edges inside the domain and B is empty.
    """

    env: StaticEnvironment
    speed: Speed
    domain: tuple[Site, ...]
    index: Mapping[Site, int] = field(repr=False)
    theta: np.ndarray = field(repr=False)
    stiffness: sparse.csr_matrix = field(repr=False)
    exterior: tuple[Site, ...] = field(repr=False)
    exterior_index: Mapping[Site, int] = field(repr=False)
    coupling: sparse.csr_matrix = field(repr=False)
    boundary: Boundary = Boundary.DIRICHLET

    @property
    def size(self) -> int:
        return len(self.domain)

    @property
    def rates(self) -> np.ndarray:
        """Total jump rate mu(x) / theta(x) of every domain site."""
        return self.env.mu_array[self._ij] / self.theta

    @property
    def _ij(self) -> tuple[np.ndarray, np.ndarray]:
        L = self.env.half_width
        xs = np.fromiter((s.x for s in self.domain), dtype=np.int64, count=self.size)
        ys = np.fromiter((s.y for s in self.domain), dtype=np.int64, count=self.size)
        return xs + L, ys + L

    def matrix(self) -> sparse.csr_matrix:
        """The generator itself on the domain (exterior values taken as 0)."""
        return sparse.diags(1.0 / self.theta) @ (-self.stiffness)


@dataclass(frozen=True, eq=False)
class SiteField:
    """A function on sites, zero away from its support."""

    sites: tuple[Site, ...]
    values: np.ndarray
    index: Mapping[Site, int] = field(repr=False)

    @classmethod
    def from_values(cls, sites, values):
        sites = tuple(Site(*s) for s in sites)
        return cls(sites, np.asarray(values, dtype=float), {s: k for k, s in enumerate(sites)})

    def __call__(self, s) -> float:
        k = self.index.get(Site(*s))
        return 0.0 if k is None else float(self.values[k])

    def __len__(self) -> int:
        return len(self.sites)

    def as_dict(self) -> dict[Site, float]:
        return {s: float(v) for s, v in zip(self.sites, self.values, strict=True)}
