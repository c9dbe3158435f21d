"""
Heat kernels by uniformization.

With Lambda the largest jump rate on the domain, the walk is a Poisson(Lambda)
clock driving the substochastic chain P = I + L / Lambda. A distribution pi
is propagated as

    pi_t = sum_k Poisson(k; Lambda t) pi P^k,    pi P = pi - K (pi / theta) / Lambda

and its time integral over [0, t] uses the weights P(N_t > k) / Lambda, so
integrals of the heat kernel are exact up to the same series truncation.
"""

import logging
import math
from collections.abc import Iterable

import numpy as np
from django.conf import settings
from scipy.stats import poisson

from rcmlab.environment import Speed, StaticEnvironment
from rcmlab.exceptions import ConfigurationError, DomainError, SolverError
from rcmlab.lattice import ORIGIN, Site
from rcmlab.operator import Boundary, Generator, assemble, component_within
from rcmlab.percolation import clusters

from .models import GaussianReport, HeatKernelSlice, Propagation

logger = logging.getLogger(__name__)

# Largest Poisson mean handled in one series; longer steps are split.
MAX_POISSON_MEAN = 500.0
MAX_TERMS = 100_000
DEFAULT_LEAK_BUDGET = 1e-6


def geometric_grid(t0: float, t_max: float, ratio: float = 1.25) -> list[float]:
    """t0 * ratio^k for every k with t0 * ratio^k <= t_max."""
    if t0 <= 0 or ratio <= 1:
        raise ConfigurationError(f"Geometric grid needs t0 > 0 and ratio > 1, got {t0}, {ratio}")
    grid = []
    t = t0
    while t <= t_max * (1 + 1e-12):
        grid.append(t)
        t *= ratio
    return grid


def max_rate(env: StaticEnvironment, speed: Speed) -> float:
    """Largest total jump rate mu / theta over the window's cluster sites."""
    mu = env.mu_array
    theta = env.theta_array(speed)
    on = mu > 0
    return float((mu[on] / theta[on]).max()) if on.any() else 0.0


def auto_radius(rate: float, t: float, leak_budget: float = DEFAULT_LEAK_BUDGET) -> int:
    """Box radius beyond which the displacement tail up to time t stays below the budget."""
    return math.ceil(math.sqrt(2 * rate * t * math.log(8 / leak_budget))) + 2


def heat_domain(
    env: StaticEnvironment,
    base,
    radius: int,
    strict: bool = True,
) -> list[Site]:
    """
    The component of base inside the l-infinity box of the given radius.

    Raises:
        ConfigurationError: if strict and the box does not fit inside the window
    """
    base = Site(*base)
    L = env.half_width
    needed = max(abs(base.x), abs(base.y)) + radius + 1
    if needed > L:
        if strict:
            raise ConfigurationError(
                f"Heat-kernel box of radius {radius} around {tuple(base)} needs window "
                f"half-width L >= {needed}, got {L}"
            )
        radius = L - 1 - max(abs(base.x), abs(base.y))
    box = env.window.box(base, radius)
    return component_within(env, box, base)


def advance(gen: Generator, pi: np.ndarray, dt: float, tol: float, rate: float | None = None):
    """
    Advance the distribution pi by dt under a fixed generator.

    Returns (pi_dt, integral of pi_s over [0, dt], truncated mass). rate
    defaults to the largest total jump rate of the generator.
    """
    if dt <= 0:
        return pi.copy(), np.zeros_like(pi), 0.0
    if rate is None:
        rate = float((gen.stiffness.diagonal() / gen.theta).max())
    chunks = max(1, math.ceil(rate * dt / MAX_POISSON_MEAN))
    mean = rate * dt / chunks
    kmax = int(poisson.isf(tol / chunks, mean)) + 1
    if kmax > MAX_TERMS:
        raise SolverError(f"Uniformization needs {kmax} terms for mean {mean:.1f}; reduce tol")
    ks = np.arange(kmax + 1)
    weights = poisson.pmf(ks, mean)
    tails = poisson.sf(ks, mean) / rate
    lost = float(poisson.sf(kmax, mean))

    K = gen.stiffness
    theta = gen.theta
    integral = np.zeros_like(pi)
    truncated = 0.0
    for _ in range(chunks):
        v = pi
        new = weights[0] * v
        integral += tails[0] * v
        for k in range(1, kmax + 1):
            v = v - (K @ (v / theta)) / rate
            new += weights[k] * v
            integral += tails[k] * v
        pi = new
        truncated += lost
    return pi, integral, truncated


def propagate(
    gen: Generator,
    base,
    times: Iterable[float],
    tol: float | None = None,
) -> Propagation:
    """Propagate the point mass at base along an increasing time grid."""
    tol = settings.RCM_LAB_HEAT_TOL if tol is None else tol
    base = Site(*base)
    if base not in gen.index:
        raise DomainError(f"Base point {tuple(base)} is not in the domain")
    times = tuple(float(t) for t in times)
    if any(b < a for a, b in zip(times, times[1:], strict=False)) or (times and times[0] < 0):
        raise DomainError("Time grid must be nonnegative and increasing")

    rate = float((gen.stiffness.diagonal() / gen.theta).max())
    pi = np.zeros(gen.size)
    pi[gen.index[base]] = 1.0
    states, integrals, truncation = [], [], []
    previous, total = 0.0, 0.0
    for t in times:
        pi, integral, lost = advance(gen, pi, t - previous, tol, rate)
        total += lost
        states.append(pi)
        integrals.append(integral)
        truncation.append(total)
        previous = t
    logger.debug(
        f"Propagated from {tuple(base)} over {len(times)} times on {gen.size} sites "
        f"(rate {rate:.3f}, final leak {1 - pi.sum():.2e})"
    )
    return Propagation(gen, base, times, tuple(states), tuple(integrals), tuple(truncation))


def transition_density(
    env: StaticEnvironment,
    speed: Speed,
    x,
    t: float,
    domain: Iterable | None = None,
    tol: float | None = None,
    leak_budget: float = DEFAULT_LEAK_BUDGET,
    boundary: Boundary = Boundary.DIRICHLET,
) -> HeatKernelSlice:
    """
    p_t(x, .) = P_x[X_t = .] / theta(.) on a domain around x.

    Without an explicit domain, the box is sized so that the mass escaping
    it by time t stays within the leak budget.

    Raises:
        DomainError: if x is off the giant cluster or t < 0
        ConfigurationError: if the auto-sized box does not fit the window
    """
    x = Site(*x)
    if t < 0:
        raise DomainError(f"Time must be nonnegative, got {t}")
    geometry = clusters(env)
    if geometry.trivial or not geometry.contains(x):
        raise DomainError(f"Site {tuple(x)} is not on the giant cluster")
    if domain is None:
        domain = heat_domain(env, x, auto_radius(max_rate(env, speed), t, leak_budget))
    else:
        domain = component_within(env, domain, x)
    gen = assemble(env, speed, domain, boundary=boundary)
    run = propagate(gen, x, [t], tol)
    return HeatKernelSlice(
        base=x,
        time=t,
        sites=gen.domain,
        density=run.density(0),
        theta=gen.theta,
        truncation_error=run.truncation[0],
        leak=run.leak(0),
        index=dict(gen.index),
    )


def llt_curve(
    env: StaticEnvironment,
    speed: Speed,
    t_grid: Iterable[float],
    base=ORIGIN,
    radius: int | None = None,
    tol: float | None = None,
    leak_budget: float = DEFAULT_LEAK_BUDGET,
) -> list[tuple[float, float]]:
    """The normalised on-diagonal curve t * p_t(0, 0) along a time grid."""
    base = Site(*base)
    t_grid = sorted(t_grid)
    geometry = clusters(env)
    if not geometry.contains(base):
        raise DomainError(f"Site {tuple(base)} is not on the giant cluster")
    if radius is None:
        radius = auto_radius(max_rate(env, speed), t_grid[-1], leak_budget)
    gen = assemble(env, speed, heat_domain(env, base, radius))
    run = propagate(gen, base, t_grid, tol)
    curve = [(t, t * run.density_at(k, base)) for k, t in enumerate(t_grid)]
    logger.info(
        f"LLT curve on {gen.size} sites: t*p_t = {curve[-1][1]:.6f} at t = {curve[-1][0]:g}, "
        f"leak {run.leak(len(t_grid) - 1):.2e}"
    )
    return curve


def _near_diagonal(run: Propagation, k: int):
    t = run.times[k]
    base = run.base
    sites = run.generator.domain
    dx = np.array([s.x - base.x for s in sites], dtype=float)
    dy = np.array([s.y - base.y for s in sites], dtype=float)
    r2 = dx**2 + dy**2
    return t, r2, run.density(k)


def gaussian_diagnostic(
    env: StaticEnvironment,
    speed: Speed,
    t: float,
    radius: int,
    trial_c: Iterable[float] = (0.05, 0.1, 0.15, 0.2, 0.25),
    base=ORIGIN,
    tol: float | None = None,
) -> GaussianReport:
    """
    Smallest C with t p_t(0, y) exp(c |y|^2 / t) <= C on |y| <= t, per trial c.

    The far regime |y| > t is compared against C t^-1 exp(-c |y| log(|y| / t))
    using the largest trial c and its fitted C.
    """
    if t < 1:
        raise DomainError(f"Gaussian diagnostic needs t >= 1, got {t}")
    base = Site(*base)
    gen = assemble(env, speed, heat_domain(env, base, radius, strict=False))
    run = propagate(gen, base, [t], tol)
    t, r2, p = _near_diagonal(run, 0)

    near = r2 <= t * t
    trial_c = tuple(sorted(trial_c))
    fitted, worst = [], []
    for c in trial_c:
        scaled = np.where(near, t * p * np.exp(c * r2 / t), -np.inf)
        k = int(np.argmax(scaled))
        fitted.append(float(scaled[k]))
        worst.append(gen.domain[k])

    far = (r2 > t * t) & (p > 0)
    c, C = trial_c[-1], fitted[-1]
    r = np.sqrt(r2[far])
    bound = C / t * np.exp(-c * r * np.maximum(1.0, np.log(r / t)))
    far_ok = bool((p[far] <= bound).all())
    report = GaussianReport(
        time=t,
        trial_c=trial_c,
        fitted_C=tuple(fitted),
        worst_sites=tuple(worst),
        far_regime_ok=far_ok,
        far_regime_sites=int(far.sum()),
        leak=run.leak(0),
    )
    logger.info(f"Gaussian diagnostic at t={t:g}: C(c) = {dict(zip(trial_c, fitted, strict=True))}")
    return report


def gaussian_onset(
    env: StaticEnvironment,
    speed: Speed,
    t_grid: Iterable[float],
    c: float,
    C: float,
    base=ORIGIN,
    radius: int | None = None,
    tol: float | None = None,
) -> float | None:
    """
    First grid time from which t p_t(0, y) exp(c |y|^2 / t) <= C holds on
    |y| <= t at every later grid time, or None if it never settles.
    """
    base = Site(*base)
    t_grid = sorted(t_grid)
    if radius is None:
        radius = auto_radius(max_rate(env, speed), t_grid[-1])
    gen = assemble(env, speed, heat_domain(env, base, radius, strict=False))
    run = propagate(gen, base, t_grid, tol)
    holds = []
    for k in range(len(t_grid)):
        t, r2, p = _near_diagonal(run, k)
        near = r2 <= t * t
        holds.append(bool((t * p[near] * np.exp(c * r2[near] / t) <= C).all()))
    onset = None
    for k in reversed(range(len(t_grid))):
        if not holds[k]:
            break
        onset = t_grid[k]
    logger.info(f"Gaussian onset for c={c}, C={C}: {onset}")
    return onset
