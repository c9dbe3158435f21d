"""
Quenched and annealed heat kernels of dynamic environments.

The quenched kernel is propagated slot by slot: within a slot the frame is
fixed, so the heat-kernel series of that frame advances the distribution
exactly. The speed measure is identically one here.
"""

import logging
import math
from collections.abc import Callable, Iterable

import numpy as np
from django.conf import settings
from scipy import stats

from rcmlab.environment import ConductanceLaw, Speed
from rcmlab.exceptions import ConfigurationError, DomainError
from rcmlab.heatkernel import advance, auto_radius
from rcmlab.heatkernel.services import DEFAULT_LEAK_BUDGET
from rcmlab.lattice import ORIGIN, Site, l1_distance
from rcmlab.operator import assemble
from rcmlab.seeding import derive_seed, rng_for

from ..models import (
    AnnealedKernelEstimate,
    AnnealedMethod,
    DynamicEnvironment,
    DynamicKernel,
    DynamicMomentReport,
    GradientSlope,
    max_edge_gradient,
)
from .inhomogeneous import simulate_inhomogeneous_endpoints

logger = logging.getLogger(__name__)

# Generators kept per propagation; cycled frames hit this cache every period.
GENERATOR_CACHE = 64


def _builder(source) -> Callable[[int], DynamicEnvironment]:
    """A seed -> DynamicEnvironment factory from a recipe or a fixed environment."""
    if isinstance(source, DynamicEnvironment):
        return lambda seed: source
    if hasattr(source, "build"):
        return source.build
    raise ConfigurationError(f"Cannot build dynamic environments from {type(source).__name__}")


def _box(denv: DynamicEnvironment, base: Site, radius: int) -> list[Site]:
    L = denv.window.half_width
    needed = max(abs(base.x), abs(base.y)) + radius + 1
    if needed > L:
        raise ConfigurationError(
            f"Dynamic kernel box of radius {radius} around {tuple(base)} needs window "
            f"half-width L >= {needed}, got {L}"
        )
    return sorted(denv.window.box(base, radius))


def quenched_dynamic_density(
    denv: DynamicEnvironment,
    times: Iterable[float],
    base=ORIGIN,
    radius: int | None = None,
    tol: float | None = None,
    leak_budget: float = DEFAULT_LEAK_BUDGET,
) -> DynamicKernel:
    """
    p_{0,t}(base, .) for every t in an increasing grid, with running time
    integrals, by uniformization frame by frame on a Dirichlet box.
    """
    tol = settings.RCM_LAB_HEAT_TOL if tol is None else tol
    base = Site(*base)
    times = tuple(float(t) for t in times)
    if not times or times[0] < 0 or any(b < a for a, b in zip(times, times[1:], strict=False)):
        raise DomainError("Time grid must be nonempty, nonnegative and increasing")
    if radius is None:
        radius = auto_radius(4.0 * denv.c_hi, times[-1], leak_budget)
    sites = _box(denv, base, radius)
    side = 2 * radius + 1

    cache: dict[int, tuple] = {}

    def generator(k: int):
        env = denv.frame(k)
        hit = cache.get(id(env))
        if hit is None:
            if len(cache) >= GENERATOR_CACHE:
                cache.clear()
            hit = cache[id(env)] = (env, assemble(env, Speed.VSRW, sites))
        return hit[1]

    s = denv.slot_length
    pi = np.zeros(len(sites))
    pi[sites.index(base)] = 1.0
    running = np.zeros(len(sites))
    densities, integrals = [], []
    clock, slot, truncation = 0.0, 0, 0.0
    slot_tol = tol / max(1, math.ceil(times[-1] / s))
    for t in times:
        while clock < t:
            end = min((slot + 1) * s, t)
            pi, integral, lost = advance(generator(slot), pi, end - clock, slot_tol)
            running += integral
            truncation += lost
            clock = end
            if end >= (slot + 1) * s:
                slot += 1
        densities.append(pi.reshape(side, side))
        integrals.append(running.reshape(side, side).copy())

    logger.debug(
        f"Quenched dynamic kernel from {tuple(base)} to t={times[-1]:g} over {slot + 1} slots, "
        f"box radius {radius}, leak {1 - pi.sum():.2e}"
    )
    return DynamicKernel(
        base=base,
        radius=radius,
        times=times,
        densities=np.array(densities),
        integrals=np.array(integrals),
        truncation=truncation,
    )


def _summarise(values: list[float], within_error: float) -> tuple[float, float]:
    values = np.asarray(values)
    if len(values) > 1:
        return float(values.mean()), float(values.std(ddof=1) / math.sqrt(len(values)))
    return float(values[0]), within_error


def annealed_density(
    source,
    t: float,
    y,
    num_envs: int = 1,
    method: AnnealedMethod | str = AnnealedMethod.UNIFORMIZATION,
    master_seed: int = 0,
    base=ORIGIN,
    radius: int | None = None,
    num_walks: int = 10_000,
    tol: float | None = None,
) -> AnnealedKernelEstimate:
    """
    The averaged density E[p_{0,t}(base, y)] over num_envs independent
    dynamic environments.

    method "uniformization" computes every quenched density exactly;
    "occupation" estimates it from num_walks thinned walkers per environment.
    With a single environment the error is the within-environment one.
    """
    if t <= 0:
        raise DomainError(f"Time must be positive, got {t}")
    if num_envs < 1:
        raise ConfigurationError(f"Need at least one environment, got {num_envs}")
    method = AnnealedMethod(method)
    build = _builder(source)
    base, y = Site(*base), Site(*y)

    values, within = [], 0.0
    for m in range(num_envs):
        denv = build(derive_seed(master_seed, m))
        if method == AnnealedMethod.UNIFORMIZATION:
            kernel = quenched_dynamic_density(denv, [t], base, radius, tol)
            values.append(kernel.at(0, y))
            within = kernel.truncation + kernel.leak(0)
        else:
            starts = np.tile(np.array(base), (num_walks, 1))
            batch = simulate_inhomogeneous_endpoints(denv, starts, t, rng_for(master_seed, m, 1))
            if batch.leak_fraction > 0:
                logger.warning(f"{batch.leak_fraction:.2%} of walkers reached the window frame")
            hit = float(np.all(batch.positions == np.array(y), axis=1).mean())
            values.append(hit)
            within = math.sqrt(max(hit * (1 - hit), 1 / num_walks) / num_walks)

    value, error = _summarise(values, within)
    logger.info(f"Annealed density at t={t:g}, y={tuple(y)}: {value:.6g} +- {error:.2g} ({method})")
    return AnnealedKernelEstimate(value=value, std_error=error, num_envs=num_envs)


def annealed_potential(
    source,
    x,
    horizon: float,
    num_envs: int = 1,
    master_seed: int = 0,
    radius: int | None = None,
    tol: float | None = None,
) -> AnnealedKernelEstimate:
    """
    int_0^T (pbar_t(0, 0) - pbar_t(0, x)) dt with T = horizon.

    tail bounds the neglected part from the annealed gradient at T: with
    c = T^{3/2} max_e |grad pbar_T|, the remainder is at most 2 c |x|_1 T^{-1/2}.
    """
    x = Site(*x)
    if horizon <= 0:
        raise DomainError(f"Horizon must be positive, got {horizon}")
    if x == ORIGIN:
        return AnnealedKernelEstimate(value=0.0, std_error=0.0, num_envs=num_envs, tail=0.0)
    build = _builder(source)

    values, densities = [], []
    for m in range(num_envs):
        denv = build(derive_seed(master_seed, m))
        kernel = quenched_dynamic_density(denv, [horizon], ORIGIN, radius, tol)
        values.append(kernel.integral_at(0, ORIGIN) - kernel.integral_at(0, x))
        densities.append(kernel.densities[0])

    gradient = max_edge_gradient(np.mean(densities, axis=0))
    c = horizon**1.5 * gradient
    tail = 2 * c * l1_distance(ORIGIN, x) / math.sqrt(horizon)
    value, error = _summarise(values, 0.0)
    logger.info(
        f"Annealed potential a({tuple(x)}) to T={horizon:g}: "
        f"{value:.6g} +- {error:.2g}, tail <= {tail:.2g}"
    )
    return AnnealedKernelEstimate(value=value, std_error=error, num_envs=num_envs, tail=tail)


def annealed_gradient_slope(
    source,
    t_grid: Iterable[float],
    num_envs: int = 1,
    master_seed: int = 0,
    radius: int | None = None,
    tol: float | None = None,
) -> GradientSlope:
    """
    Log-log slope of max over edges |pbar_t(0, x) - pbar_t(0, y)| along t_grid.
    """
    t_grid = sorted(float(t) for t in t_grid)
    if len(t_grid) < 3:
        raise ConfigurationError("The gradient slope needs at least three times")
    build = _builder(source)
    total = None
    for m in range(num_envs):
        denv = build(derive_seed(master_seed, m))
        kernel = quenched_dynamic_density(denv, t_grid, ORIGIN, radius, tol)
        total = kernel.densities if total is None else total + kernel.densities
    mean = total / num_envs
    gradients = [max_edge_gradient(mean[k]) for k in range(len(t_grid))]
    fit = stats.linregress(np.log(t_grid), np.log(gradients))
    logger.info(
        f"Annealed gradient slope {fit.slope:.3f} +- {fit.stderr:.3f} over {len(t_grid)} times"
    )
    return GradientSlope(
        times=tuple(t_grid),
        gradients=tuple(gradients),
        slope=float(fit.slope),
        slope_error=float(fit.stderr),
        num_envs=num_envs,
    )


def check_dynamic_moment_condition(law: ConductanceLaw, p: float, q: float) -> DynamicMomentReport:
    """
    Moment check for frames drawn from law: E[omega^p] < inf,
    E[omega^-q; open] < inf and 1/(p-1) + 1/((p-1) q) + 1/q < 1.

    Raises:
        DomainError: if p <= 1 or q <= 0
    """
    if p <= 1 or q <= 0:
        raise DomainError(f"Dynamic moment exponents need p > 1 and q > 0, got p={p}, q={q}")
    positive = law.moment(p)
    negative = law.moment(-q)
    exponent_sum = 1 / (p - 1) + 1 / ((p - 1) * q) + 1 / q
    satisfied = bool(np.isfinite(positive) and np.isfinite(negative) and exponent_sum < 1)
    if not satisfied:
        logger.info(f"Dynamic moment condition fails for {law.describe()} at p={p}, q={q}")
    return DynamicMomentReport(
        p=p,
        q=q,
        positive_moment=positive,
        negative_moment=negative,
        exponent_sum=exponent_sum,
        satisfied=satisfied,
    )
