"""
Langevin dynamics of a gradient interface on a tilted torus, and the
Helffer-Sjostrand conductances it induces on the lattice.

One Euler-Maruyama step of size h reads

    phi(x) <- phi(x) - h sum_{y ~ x} V'(phi(x) - phi(y)) + sqrt(2 h) xi(x)

with i.i.d. standard Gaussians xi. The tilt is carried by the affine part
of phi, so only the periodic part psi is stored and updated.
"""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from rcmlab.environment import StaticEnvironment
from rcmlab.exceptions import ConfigurationError, InterfaceError
from rcmlab.lattice import Window
from rcmlab.seeding import rng_for

from ..models import (
    DynamicEnvironment,
    InterfaceField,
    InterfacePotential,
    PotentialKind,
    VarianceRow,
    VarianceTable,
    check_frame,
)

logger = logging.getLogger(__name__)


def interface_step(field: InterfaceField) -> InterfaceField:
    """
    Advance the field by one Euler-Maruyama step.

    Raises:
        InterfaceError: if any height becomes non-finite
    """
    east, north = field.gradients()
    V1 = field.potential.first
    # sum over neighbours of V'(phi(x) - phi(y)), with V' odd
    drift = (
        V1(np.roll(east, 1, axis=0))
        - V1(east)
        + V1(np.roll(north, 1, axis=1))
        - V1(north)
    )
    noise = rng_for(field.seed, field.step).standard_normal((field.side, field.side))
    psi = field.psi - field.h * drift + field.noise_scale * math.sqrt(2 * field.h) * noise
    if not np.isfinite(psi).all():
        raise InterfaceError(
            f"Non-finite heights after step {field.step + 1} (h={field.h}, side={field.side})"
        )
    return replace(field, psi=psi, step=field.step + 1)


def run_interface(field: InterfaceField, steps: int) -> InterfaceField:
    """Apply interface_step the given number of times."""
    for _ in range(steps):
        field = interface_step(field)
    return field


def hs_conductances(field: InterfaceField, half_width: int | None = None) -> StaticEnvironment:
    """
    The frame omega(x, y) = V''(phi(y) - phi(x)) on a window, with the torus
    unrolled periodically over it.

    Raises:
        EllipticityError: if a conductance leaves [c_minus, c_plus]
    """
    if half_width is None:
        half_width = (field.side - 1) // 2
    window = Window(half_width)
    east_grad, north_grad = field.gradients()
    V2 = field.potential.second
    cells = np.arange(-half_width, half_width + 1) % field.side
    rows, cols = np.ix_(cells, cells)
    east = V2(east_grad)[rows, cols]
    north = V2(north_grad)[rows, cols]
    east[-1, :] = 0.0
    north[:, -1] = 0.0
    env = StaticEnvironment(window, east, north, seed=field.seed)
    check_frame(env, field.potential.c_minus, field.potential.c_plus)
    return env


class InterfaceDrivenEnvironment(DynamicEnvironment):
    """
    Dynamic conductances read off an interface field stepped every h.

    Frame k is hs_conductances of the field after k * steps_per_slot steps.
    Frames are produced on demand; requests in increasing order cost one
    step each, an earlier request replays the field from its initial state.
    """

    def __init__(
        self, field: InterfaceField, half_width: int | None = None, steps_per_slot: int = 1
    ):
        if steps_per_slot < 1:
            raise ConfigurationError(f"steps_per_slot must be at least 1, got {steps_per_slot}")
        self.initial = field
        self.half_width = (field.side - 1) // 2 if half_width is None else half_width
        self.steps_per_slot = steps_per_slot
        self.slot_length = field.h * steps_per_slot
        self.c_lo = field.potential.c_minus
        self.c_hi = field.potential.c_plus
        self.window = Window(self.half_width)
        self.diagnostic = False
        self._check_bounds()
        self._k = 0
        self._field = field
        self._frame = hs_conductances(field, self.half_width)

    @property
    def field(self) -> InterfaceField:
        return self._field

    def frame(self, k: int) -> StaticEnvironment:
        if k < 0:
            raise ConfigurationError(f"Frame index must be nonnegative, got {k}")
        if k < self._k:
            self._k, self._field = 0, self.initial
        if k > self._k:
            self._field = run_interface(self._field, (k - self._k) * self.steps_per_slot)
            self._k = k
            self._frame = hs_conductances(self._field, self.half_width)
        return self._frame


@dataclass(frozen=True)
class InterfaceDriver:
    """
    Recipe for interface-driven environments: a flat field of the given
    side is burnt in for burn_in steps under the replica seed.
    """

    side: int
    potential: InterfacePotential = InterfacePotential()
    tilt: tuple[float, float] = (0.0, 0.0)
    h: float | None = None
    burn_in: int = 0
    half_width: int | None = None
    steps_per_slot: int = 1
    noise_scale: float = 1.0

    def build(self, seed: int) -> InterfaceDrivenEnvironment:
        field = InterfaceField.flat(
            self.side, self.potential, self.tilt, self.h, seed=seed, noise_scale=self.noise_scale
        )
        field = run_interface(field, self.burn_in)
        return InterfaceDrivenEnvironment(field, self.half_width, self.steps_per_slot)


def gaussian_variance_oracle(side: int, offset, h: float = 0.0) -> float:
    """
    Exact stationary var[phi(v) - phi(0)] for V(r) = r^2 / 2 on the torus.

    With lambda_k = 4 - 2 cos k1 - 2 cos k2 over the dual torus,

        var = L^-2 sum_{k != 0} 2 (1 - cos k.v) / (lambda_k (1 - h lambda_k / 2))

    where h = 0 gives the continuous-time dynamics and h > 0 the
    Euler-Maruyama chain with that step.
    """
    if h < 0 or h >= 0.25:
        raise ConfigurationError(f"Oracle step must satisfy 0 <= h < 1/4, got {h}")
    k = 2 * np.pi * np.arange(side) / side
    k1, k2 = np.meshgrid(k, k, indexing="ij")
    lam = 4 - 2 * np.cos(k1) - 2 * np.cos(k2)
    lam[0, 0] = 1.0
    numerator = 2 * (1 - np.cos(k1 * offset[0] + k2 * offset[1]))
    numerator[0, 0] = 0.0
    return float((numerator / (lam * (1 - h * lam / 2))).sum() / side**2)


def fit_log_slope(ns: Iterable[int], values: Iterable[float]) -> tuple[float, float]:
    """Least-squares slope of values against ln n, with its standard error."""
    ns = np.asarray(list(ns), dtype=float)
    values = np.asarray(list(values), dtype=float)
    if len(ns) < 2:
        raise ConfigurationError("A log-slope fit needs at least two points")
    if len(ns) == 2:
        slope = (values[1] - values[0]) / math.log(ns[1] / ns[0])
        return float(slope), math.nan
    fit = stats.linregress(np.log(ns), values)
    return float(fit.slope), float(fit.stderr)


def _squared_differences(field: InterfaceField, offsets) -> np.ndarray:
    """Torus average of (psi(x + v) - psi(x))^2 for every offset v."""
    psi = field.psi
    return np.array(
        [
            np.mean((np.roll(psi, (-v[0], -v[1]), axis=(0, 1)) - psi) ** 2)
            for v in offsets
        ]
    )


def _batch_error(series: np.ndarray, num_batches: int) -> np.ndarray:
    batches = np.array_split(series, num_batches)
    means = np.array([b.mean(axis=0) for b in batches])
    return means.std(axis=0, ddof=1) / math.sqrt(num_batches)


def _lag_one(series: np.ndarray) -> float:
    centred = series - series.mean()
    denominator = float(centred @ centred)
    if denominator == 0.0 or len(series) < 3:
        return 0.0
    return float(centred[1:] @ centred[:-1]) / denominator


def variance_scaling(
    potential: InterfacePotential,
    tilt: tuple[float, float],
    side: int,
    n_grid: Iterable[int],
    burn_in: int,
    samples: int,
    spacing: int = 10,
    direction: tuple[float, float] = (1.0, 0.0),
    h: float | None = None,
    seed: int = 0,
    num_batches: int = 10,
    hs_cross_check=None,
) -> VarianceTable:
    """
    Stationary var[phi(floor(n x)) - phi(0)] along n_grid from one long run.

    Each sample averages over all torus translates; errors come from batch
    means. The first and second halves of the run are compared at the
    largest n, and a drift beyond three combined errors flags the run as
    non-stationary. hs_cross_check, when given, maps an offset to an
    estimate of 2 a(0, offset) for the companion column.
    """
    n_grid = sorted(set(int(n) for n in n_grid))
    if max(n_grid) * max(abs(direction[0]), abs(direction[1])) >= side / 2:
        raise ConfigurationError(
            f"Torus side {side} is too small for n up to {max(n_grid)}; "
            f"need side > {2 * max(n_grid)}"
        )
    if num_batches < 2 or samples < 2 * num_batches:
        raise ConfigurationError(
            f"Need at least {2 * num_batches} samples for {num_batches} batches"
        )
    offsets = [(math.floor(n * direction[0]), math.floor(n * direction[1])) for n in n_grid]

    field = InterfaceField.flat(side, potential, tilt, h, seed=seed)
    field = run_interface(field, burn_in)
    logger.info(f"Interface burn-in done: {burn_in} steps of h={field.h} on side {side}")

    series = np.empty((samples, len(offsets)))
    for s in range(samples):
        field = run_interface(field, spacing)
        series[s] = _squared_differences(field, offsets)

    variances = series.mean(axis=0)
    errors = _batch_error(series, num_batches)

    half = samples // 2
    first, second = series[:half, -1], series[half:, -1]
    drift = abs(first.mean() - second.mean())
    per_half = max(2, num_batches // 2)
    combined = math.hypot(_batch_error(first, per_half), _batch_error(second, per_half))
    nonstationary = bool(drift > 3 * combined)
    if nonstationary:
        logger.warning(
            f"Interface run looks non-stationary: half means differ by {drift:.4g} "
            f"(3 sigma = {3 * combined:.4g}); lengthen the burn-in"
        )
    autocorrelation = _lag_one(series[:, -1])
    logger.info(f"Lag-one autocorrelation of the test functional: {autocorrelation:.3f}")

    rows = []
    for n, v, var, err in zip(n_grid, offsets, variances, errors, strict=True):
        oracle = None
        if potential.kind == PotentialKind.QUADRATIC:
            oracle = gaussian_variance_oracle(side, v, field.h)
        hs = float(hs_cross_check(v)) if hs_cross_check is not None else None
        rows.append(VarianceRow(n, v, float(var), float(err), oracle, hs))
        logger.info(
            f"n={n}: var {var:.5f} +- {err:.5f}"
            + (f", oracle {oracle:.5f}" if oracle is not None else "")
        )

    slope, slope_error = math.nan, math.nan
    if len(n_grid) >= 2:
        slope, slope_error = fit_log_slope(n_grid, variances)
    return VarianceTable(
        rows=tuple(rows),
        slope=slope,
        slope_error=slope_error,
        nonstationary=nonstationary,
        autocorrelation=autocorrelation,
        side=side,
        h=field.h,
    )
