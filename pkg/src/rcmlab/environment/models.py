"""Conductance laws and static environments."""

import math
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property

import numpy as np

from rcmlab.exceptions import ConfigurationError, DomainError
from rcmlab.lattice import Edge, Site, Window


class Speed(StrEnum):
    """Speed measure of the walk: counting measure or the conductance sum."""

    VSRW = "vsrw"
    CSRW = "csrw"


class PositiveLaw(StrEnum):
    """Law of an open edge's conductance."""

    CONSTANT = "constant"
    UNIFORM = "uniform"
    PARETO = "pareto"
    INVERSE_PARETO = "inverse_pareto"


@dataclass(frozen=True)
class ConductanceLaw:
    """
    Edges are open with probability p_open and then draw i.i.d. from the
    positive law; closed edges carry conductance exactly 0.

    Parameters by family:
        constant: value
        uniform: low, high (0 < low < high)
        pareto: shape alpha, scale (support [scale, inf), heavy upper tail)
        inverse_pareto: shape beta, scale (support (0, scale], mass near 0)
    """

    p_open: float = 1.0
    family: PositiveLaw = PositiveLaw.CONSTANT
    value: float = 1.0
    low: float = 0.5
    high: float = 1.5
    shape: float = 3.0
    scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.p_open <= 1:
            raise ConfigurationError(f"p_open must lie in (0, 1], got {self.p_open}")
        object.__setattr__(self, "family", PositiveLaw(self.family))
        if self.family == PositiveLaw.CONSTANT and self.value <= 0:
            raise ConfigurationError(f"Constant conductance must be positive, got {self.value}")
        if self.family == PositiveLaw.UNIFORM and not 0 < self.low < self.high:
            raise ConfigurationError(
                f"Uniform law needs 0 < low < high, got low={self.low}, high={self.high}"
            )
        if self.family in (PositiveLaw.PARETO, PositiveLaw.INVERSE_PARETO) and (
            self.shape <= 0 or self.scale <= 0
        ):
            raise ConfigurationError(
                f"{self.family} law needs positive shape and scale, "
                f"got shape={self.shape}, scale={self.scale}"
            )

    @classmethod
    def constant(cls, value=1.0, p_open=1.0):
        return cls(p_open=p_open, family=PositiveLaw.CONSTANT, value=value)

    @classmethod
    def uniform(cls, low, high, p_open=1.0):
        return cls(p_open=p_open, family=PositiveLaw.UNIFORM, low=low, high=high)

    @classmethod
    def pareto(cls, alpha, scale=1.0, p_open=1.0):
        return cls(p_open=p_open, family=PositiveLaw.PARETO, shape=alpha, scale=scale)

    @classmethod
    def inverse_pareto(cls, beta, scale=1.0, p_open=1.0):
        return cls(p_open=p_open, family=PositiveLaw.INVERSE_PARETO, shape=beta, scale=scale)

    def inverse_cdf(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms in [0, 1) to draws from the positive law."""
        u = np.asarray(u, dtype=float)
        match self.family:
            case PositiveLaw.CONSTANT:
                return np.full_like(u, self.value)
            case PositiveLaw.UNIFORM:
                return self.low + (self.high - self.low) * u
            case PositiveLaw.PARETO:
                return self.scale * (1.0 - u) ** (-1.0 / self.shape)
            case PositiveLaw.INVERSE_PARETO:
                # 1 - u lies in (0, 1], so draws are strictly positive
                return self.scale * (1.0 - u) ** (1.0 / self.shape)

    def moment(self, s: float) -> float:
        """E[omega^s ; edge open] for real s, possibly infinite."""
        match self.family:
            case PositiveLaw.CONSTANT:
                m = self.value**s
            case PositiveLaw.UNIFORM:
                a, b = self.low, self.high
                if math.isclose(s, -1.0):
                    m = math.log(b / a) / (b - a)
                else:
                    m = (b ** (s + 1) - a ** (s + 1)) / ((s + 1) * (b - a))
            case PositiveLaw.PARETO:
                alpha = self.shape
                m = alpha * self.scale**s / (alpha - s) if s < alpha else math.inf
            case PositiveLaw.INVERSE_PARETO:
                beta = self.shape
                m = beta * self.scale**s / (beta + s) if s > -beta else math.inf
        return self.p_open * m

    @property
    def lower_bound(self) -> float:
        """Infimum of the positive law's support (0 for inverse_pareto)."""
        match self.family:
            case PositiveLaw.CONSTANT:
                return self.value
            case PositiveLaw.UNIFORM:
                return self.low
            case PositiveLaw.PARETO:
                return self.scale
            case PositiveLaw.INVERSE_PARETO:
                return 0.0

    @property
    def upper_bound(self) -> float:
        match self.family:
            case PositiveLaw.CONSTANT:
                return self.value
            case PositiveLaw.UNIFORM:
                return self.high
            case PositiveLaw.PARETO:
                return math.inf
            case PositiveLaw.INVERSE_PARETO:
                return self.scale

    def describe(self) -> str:
        match self.family:
            case PositiveLaw.CONSTANT:
                params = f"value={self.value}"
            case PositiveLaw.UNIFORM:
                params = f"low={self.low}, high={self.high}"
            case _:
                params = f"shape={self.shape}, scale={self.scale}"
        return f"{self.family}({params}), p_open={self.p_open}"


@dataclass(frozen=True)
class MomentReport:
    """Closed-form moments for the static moment condition."""

    p: float
    q: float
    positive_moment: float
    negative_moment: float
    satisfied: bool
    non_explosion: str


def _frozen_copy(array) -> np.ndarray:
    out = np.array(array, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class StaticEnvironment:
    """
    Conductances on the edges of a window.

    east[i, j] is the edge from site (i - L, j - L) to its east neighbour and
    north[i, j] the edge to its north neighbour; edges leaving the window are
    stored as 0. Instances compare by identity and are safe to use as cache
    keys.
    """

    window: Window
    east: np.ndarray
    north: np.ndarray
    seed: int | None = None
    law: ConductanceLaw | None = None

    def __post_init__(self):
        east, north = _frozen_copy(self.east), _frozen_copy(self.north)
        if east.shape != self.window.shape or north.shape != self.window.shape:
            raise ConfigurationError(
                f"Conductance arrays of shape {east.shape}/{north.shape} "
                f"do not match window shape {self.window.shape}"
            )
        if (east < 0).any() or (north < 0).any() or not (
            np.isfinite(east).all() and np.isfinite(north).all()
        ):
            raise ConfigurationError("Conductances must be finite and nonnegative")
        if east[-1, :].any() or north[:, -1].any():
            raise ConfigurationError("Edges leaving the window must have conductance 0")
        object.__setattr__(self, "east", east)
        object.__setattr__(self, "north", north)

    @classmethod
    def from_arrays(cls, east, north, seed=None, law=None):
        east = np.asarray(east, dtype=float)
        side = east.shape[0]
        if side % 2 == 0 or east.ndim != 2 or east.shape[0] != east.shape[1]:
            raise ConfigurationError(f"Expected a square array of odd side, got {east.shape}")
        return cls(Window(side // 2), east, north, seed=seed, law=law)

    @classmethod
    def homogeneous(cls, half_width: int, value: float = 1.0):
        window = Window(half_width)
        east = np.full(window.shape, value)
        north = np.full(window.shape, value)
        east[-1, :] = 0.0
        north[:, -1] = 0.0
        return cls(window, east, north, law=ConductanceLaw.constant(value))

    @property
    def half_width(self) -> int:
        return self.window.half_width

    def conductance(self, edge: Edge) -> float:
        if not (self.window.contains(edge.a) and self.window.contains(edge.b)):
            raise DomainError(f"Edge {edge} leaves window of half-width {self.half_width}")
        i, j = self.window.index(edge.a)
        return float(self.east[i, j] if edge.horizontal else self.north[i, j])

    def between(self, a, b) -> float:
        return self.conductance(Edge(Site(*a), Site(*b)))

    @cached_property
    def incident(self) -> np.ndarray:
        """Array of shape (4, side, side): conductances towards E, W, N, S."""
        out = np.zeros((4, *self.window.shape))
        out[0] = self.east
        out[1, 1:, :] = self.east[:-1, :]
        out[2] = self.north
        out[3, :, 1:] = self.north[:, :-1]
        out.flags.writeable = False
        return out

    @cached_property
    def mu_array(self) -> np.ndarray:
        out = self.incident.sum(axis=0)
        out.flags.writeable = False
        return out

    def mu(self, x) -> float:
        if not self.window.interior(x):
            raise DomainError(
                f"Site {tuple(x)} has an incomplete stencil "
                f"in window of half-width {self.half_width}"
            )
        return float(self.mu_array[self.window.index(x)])

    def theta_array(self, speed: Speed) -> np.ndarray:
        if Speed(speed) == Speed.VSRW:
            return np.ones(self.window.shape)
        return self.mu_array

    def theta(self, speed: Speed, x) -> float:
        return float(self.theta_array(speed)[self.window.index(x)])

    def open_fraction(self) -> float:
        return (np.count_nonzero(self.east) + np.count_nonzero(self.north)) / self.window.num_edges

    def mean_conductance(self) -> float:
        return (self.east.sum() + self.north.sum()) / self.window.num_edges


@dataclass(frozen=True, eq=False)
class ShiftedEnvironment:
    """Lazy view of tau_z omega: conductance({x, y}) = base({x + z, y + z})."""

    base: StaticEnvironment
    offset: Site

    def conductance(self, edge: Edge) -> float:
        return self.base.conductance(edge.shifted(self.offset))

    def between(self, a, b) -> float:
        return self.conductance(Edge(Site(*a), Site(*b)))

    def mu(self, x) -> float:
        return self.base.mu(Site(*x) + self.offset)

    def materialize(self, half_width: int) -> StaticEnvironment:
        """Copy the view into an environment on the window of the given half-width."""
        window = Window(half_width)
        zx, zy = self.offset
        L = self.base.half_width
        if abs(zx) + half_width > L or abs(zy) + half_width > L:
            raise DomainError(
                f"Shift by {tuple(self.offset)} of a window of half-width {half_width} "
                f"leaves the base window of half-width {L}"
            )
        i0, j0 = zx + L - half_width, zy + L - half_width
        rows = slice(i0, i0 + window.side)
        cols = slice(j0, j0 + window.side)
        east = np.array(self.base.east[rows, cols])
        north = np.array(self.base.north[rows, cols])
        east[-1, :] = 0.0
        north[:, -1] = 0.0
        return StaticEnvironment(window, east, north, seed=self.base.seed, law=self.base.law)
