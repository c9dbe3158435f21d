"""Time-dynamic environments and the gradient interface field."""

import math
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from rcmlab.environment import ConductanceLaw, StaticEnvironment, sample_environment
from rcmlab.exceptions import ConfigurationError, DomainError, EllipticityError
from rcmlab.lattice import Site, Window
from rcmlab.seeding import derive_seed


def check_frame(env: StaticEnvironment, c_lo: float, c_hi: float, diagnostic: bool = False):
    """
    Raise EllipticityError unless every window edge lies in [c_lo, c_hi].

    With diagnostic set, closed edges below c_lo are tolerated.
    """
    east = env.east[:-1, :]
    north = env.north[:, :-1]
    values = np.concatenate([east.ravel(), north.ravel()])
    slack = 1e-12 * max(1.0, c_hi)
    if values.max() > c_hi + slack:
        raise EllipticityError(f"Conductance {values.max():.6g} exceeds upper bound {c_hi}")
    low = values.min()
    if low < c_lo - slack and not diagnostic:
        raise EllipticityError(f"Conductance {low:.6g} is below lower bound {c_lo}")


class DynamicEnvironment:
    """
    Conductances piecewise constant on time slots [k s, (k + 1) s) of length
    slot_length, each slot given by a StaticEnvironment frame on a common
    window, with bounds c_lo <= omega_t(e) <= c_hi.
    """

    slot_length: float
    c_lo: float
    c_hi: float
    window: Window
    diagnostic: bool = False

    def frame(self, k: int) -> StaticEnvironment:
        raise NotImplementedError

    def frame_at(self, t: float) -> StaticEnvironment:
        return self.frame(int(t // self.slot_length))

    def _check_bounds(self):
        if not (0 <= self.c_lo <= self.c_hi < math.inf) or self.c_hi == 0:
            raise ConfigurationError(
                f"Need 0 <= c_lo <= c_hi < inf, got c_lo={self.c_lo}, c_hi={self.c_hi}"
            )
        if self.c_lo == 0 and not self.diagnostic:
            raise ConfigurationError(
                "Degenerate dynamics (c_lo = 0) are only available in diagnostic mode"
            )


@dataclass(eq=False)
class PiecewiseEnvironment(DynamicEnvironment):
    """Frames switched every slot_length; the sequence repeats when cycled."""

    slot_length: float
    frames: tuple[StaticEnvironment, ...]
    c_lo: float
    c_hi: float
    cycled: bool = True
    diagnostic: bool = False

    def __post_init__(self):
        if self.slot_length <= 0:
            raise ConfigurationError(f"Slot length must be positive, got {self.slot_length}")
        if not self.frames:
            raise ConfigurationError("A piecewise environment needs at least one frame")
        self.frames = tuple(self.frames)
        self.window = self.frames[0].window
        if any(f.window != self.window for f in self.frames):
            raise ConfigurationError("All frames must share one window")
        self._check_bounds()
        for f in self.frames:
            check_frame(f, self.c_lo, self.c_hi, self.diagnostic)

    @classmethod
    def constant(cls, env: StaticEnvironment, slot_length: float = 1.0):
        values = np.concatenate([env.east[:-1, :].ravel(), env.north[:, :-1].ravel()])
        return cls(slot_length, (env,), float(values.min()), float(values.max()))

    def frame(self, k: int) -> StaticEnvironment:
        if self.cycled:
            return self.frames[k % len(self.frames)]
        return self.frames[min(k, len(self.frames) - 1)]


@dataclass(frozen=True)
class DynamicLaw:
    """
    Recipe for piecewise environments whose frames are independent samples
    of a static law.
    """

    law: ConductanceLaw
    half_width: int
    slot_length: float = 1.0
    num_frames: int = 16
    cycled: bool = True
    diagnostic: bool = False

    def build(self, seed: int) -> PiecewiseEnvironment:
        window = Window(self.half_width)
        frames = tuple(
            sample_environment(self.law, window, derive_seed(seed, k))
            for k in range(self.num_frames)
        )
        c_lo = self.law.lower_bound if self.law.p_open == 1 else 0.0
        return PiecewiseEnvironment(
            self.slot_length,
            frames,
            c_lo,
            self.law.upper_bound,
            cycled=self.cycled,
            diagnostic=self.diagnostic,
        )


class AnnealedMethod(StrEnum):
    UNIFORMIZATION = "uniformization"
    OCCUPATION = "occupation"


class PotentialKind(StrEnum):
    QUADRATIC = "quadratic"
    COSINE = "cosine"


@dataclass(frozen=True)
class InterfacePotential:
    """
    Symmetric strictly convex pair potential V.

    quadratic: V(r) = r^2 / 2
    cosine: V(r) = r^2 / 2 + epsilon cos r, with |epsilon| < 1
    """

    kind: PotentialKind = PotentialKind.QUADRATIC
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PotentialKind(self.kind))
        if self.kind == PotentialKind.COSINE and not abs(self.epsilon) < 1:
            raise ConfigurationError(f"Cosine potential needs |epsilon| < 1, got {self.epsilon}")

    def first(self, r: np.ndarray) -> np.ndarray:
        if self.kind == PotentialKind.QUADRATIC:
            return r
        return r - self.epsilon * np.sin(r)

    def second(self, r: np.ndarray) -> np.ndarray:
        if self.kind == PotentialKind.QUADRATIC:
            return np.ones_like(r)
        return 1.0 - self.epsilon * np.cos(r)

    @property
    def c_minus(self) -> float:
        return 1.0 - abs(self.epsilon) if self.kind == PotentialKind.COSINE else 1.0

    @property
    def c_plus(self) -> float:
        return 1.0 + abs(self.epsilon) if self.kind == PotentialKind.COSINE else 1.0

    def default_step(self) -> float:
        return 0.05 / self.c_plus


@dataclass(frozen=True, eq=False)
class InterfaceField:
    """
    Heights on a torus of side L with tilt u:

        phi(x) = psi(x) + u . x,  psi periodic,

    so that phi(x + L e_i) = phi(x) + L u_i. step counts Euler-Maruyama
    steps taken; the noise of step k is drawn from the stream (seed, k).
    """

    side: int
    psi: np.ndarray = field(repr=False)
    potential: InterfacePotential = field(default_factory=InterfacePotential)
    tilt: tuple[float, float] = (0.0, 0.0)
    h: float = 0.05
    seed: int = 0
    step: int = 0
    noise_scale: float = 1.0

    def __post_init__(self):
        psi = np.array(self.psi, dtype=float)
        if psi.shape != (self.side, self.side):
            raise ConfigurationError(
                f"Height array {psi.shape} does not match torus side {self.side}"
            )
        if self.h <= 0 or self.h > 0.1 / self.potential.c_plus * (1 + 1e-12):
            raise ConfigurationError(
                f"Euler-Maruyama step h={self.h} must lie in (0, {0.1 / self.potential.c_plus:g}]"
            )
        psi.flags.writeable = False
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "tilt", (float(self.tilt[0]), float(self.tilt[1])))

    @classmethod
    def flat(cls, side, potential=None, tilt=(0.0, 0.0), h=None, seed=0, noise_scale=1.0):
        potential = potential or InterfacePotential()
        h = potential.default_step() if h is None else h
        return cls(side, np.zeros((side, side)), potential, tilt, h, seed, 0, noise_scale)

    @property
    def time(self) -> float:
        return self.step * self.h

    def heights(self) -> np.ndarray:
        """phi over the fundamental domain {0, ..., L-1}^2."""
        axis = np.arange(self.side)
        X, Y = np.meshgrid(axis, axis, indexing="ij")
        return self.psi + self.tilt[0] * X + self.tilt[1] * Y

    def gradients(self) -> tuple[np.ndarray, np.ndarray]:
        """phi(x + e1) - phi(x) and phi(x + e2) - phi(x) on the torus."""
        east = np.roll(self.psi, -1, axis=0) - self.psi + self.tilt[0]
        north = np.roll(self.psi, -1, axis=1) - self.psi + self.tilt[1]
        return east, north


@dataclass(frozen=True, eq=False)
class DynamicKernel:
    """
    Quenched densities p_{0,t}(base, .) on the box of the given radius,
    as arrays indexed [k, x - base.x + radius, y - base.y + radius], with
    their running time integrals from 0 to times[k].
    """

    base: Site
    radius: int
    times: tuple[float, ...]
    densities: np.ndarray = field(repr=False)
    integrals: np.ndarray = field(repr=False)
    truncation: float = 0.0

    def _cell(self, y) -> tuple[int, int]:
        y = Site(*y)
        i, j = y.x - self.base.x + self.radius, y.y - self.base.y + self.radius
        side = 2 * self.radius + 1
        if not (0 <= i < side and 0 <= j < side):
            raise DomainError(
                f"Site {tuple(y)} lies outside the kernel box of radius {self.radius}"
            )
        return i, j

    def at(self, k: int, y) -> float:
        return float(self.densities[(k, *self._cell(y))])

    def integral_at(self, k: int, y) -> float:
        return float(self.integrals[(k, *self._cell(y))])

    def mass(self, k: int) -> float:
        return float(self.densities[k].sum())

    def leak(self, k: int) -> float:
        return 1.0 - self.mass(k)


def max_edge_gradient(density: np.ndarray) -> float:
    """Largest |p(x) - p(y)| over nearest-neighbour pairs of a 2D array."""
    east = np.abs(np.diff(density, axis=0)).max(initial=0.0)
    north = np.abs(np.diff(density, axis=1)).max(initial=0.0)
    return float(max(east, north))


@dataclass(frozen=True)
class AnnealedKernelEstimate:
    value: float
    std_error: float
    num_envs: int
    tail: float = 0.0


@dataclass(frozen=True)
class GradientSlope:
    """Log-log fit of the annealed maximal edge gradient against time."""

    times: tuple[float, ...]
    gradients: tuple[float, ...]
    slope: float
    slope_error: float
    num_envs: int


@dataclass(frozen=True)
class DynamicMomentReport:
    p: float
    q: float
    positive_moment: float
    negative_moment: float
    exponent_sum: float
    satisfied: bool


@dataclass(frozen=True)
class VarianceRow:
    n: int
    offset: tuple[int, int]
    variance: float
    std_error: float
    oracle: float | None = None
    hs_twice_potential: float | None = None


@dataclass(frozen=True)
class VarianceTable:
    rows: tuple[VarianceRow, ...]
    slope: float
    slope_error: float
    nonstationary: bool
    autocorrelation: float
    side: int
    h: float

    def variances(self) -> np.ndarray:
        return np.array([r.variance for r in self.rows])

    @property
    def ns(self) -> list[int]:
        return [r.n for r in self.rows]


def log_slope_expected(potential: InterfacePotential) -> float | None:
    """The ln-slope of the height variance when it is known in closed form."""
    if potential.kind == PotentialKind.QUADRATIC:
        return 1 / math.pi
    return None
