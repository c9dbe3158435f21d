"""
Exact simulation of the random walk among conductances.

The walk at x waits an exponential time of rate mu(x) / theta(x) and then
jumps to y with probability omega({x, y}) / mu(x).
"""

import logging
import math
from collections import Counter
from collections.abc import Iterable, Mapping

import numpy as np
from scipy import stats

from rcmlab.environment import ConductanceLaw, Speed, StaticEnvironment, sample_environment
from rcmlab.exceptions import DomainError, EstimationError
from rcmlab.lattice import DIRECTIONS, Site, Window
from rcmlab.operator import component_within
from rcmlab.percolation import ClusterGeometry, clusters
from rcmlab.seeding import derive_seed, rng_for

from .models import (
    ChiSquareResult,
    EndpointBatch,
    ExitStatistics,
    GbarEstimate,
    SigmaEstimate,
    Trajectory,
)

logger = logging.getLogger(__name__)

STEPS = np.array([(d.x, d.y) for d in DIRECTIONS], dtype=np.int64)
LEAK_BUDGET = 1e-3


def _rates(env: StaticEnvironment, speed: Speed) -> np.ndarray:
    theta = env.theta_array(speed)
    mu = env.mu_array
    return np.divide(mu, theta, out=np.zeros_like(mu), where=theta > 0)


def _in_frame(env: StaticEnvironment, frame: int, x, y) -> bool | np.ndarray:
    """True on sites within frame rows of the window border."""
    limit = env.half_width - frame
    return (np.abs(x) > limit) | (np.abs(y) > limit)


def simulate(
    env: StaticEnvironment,
    speed: Speed,
    x0,
    horizon: float,
    seed: int,
    frame: int = 1,
) -> Trajectory:
    """
    Gillespie simulation of one path on [0, horizon].

    The walk is aborted (and flagged) when it enters the outer frame of the
    window; frame = 0 disables the check.
    """
    x0 = Site(*x0)
    rng = np.random.Generator(np.random.Philox(seed))
    rates = _rates(env, speed)
    incident = env.incident
    L = env.half_width
    if rates[x0.x + L, x0.y + L] <= 0:
        raise DomainError(f"Start site {tuple(x0)} is isolated")

    t = 0.0
    x, y = x0
    times, sites = [], []
    aborted = False
    while True:
        i, j = x + L, y + L
        t += rng.exponential(1.0 / rates[i, j])
        if t > horizon:
            break
        weights = incident[:, i, j]
        k = rng.choice(4, p=weights / weights.sum())
        x, y = x + int(STEPS[k, 0]), y + int(STEPS[k, 1])
        times.append(t)
        sites.append((x, y))
        if frame and _in_frame(env, frame, x, y):
            aborted = True
            break

    return Trajectory(
        start=x0,
        horizon=horizon,
        seed=seed,
        times=np.array(times, dtype=float),
        sites=np.array(sites, dtype=np.int64).reshape(-1, 2),
        aborted=bool(aborted),
    )


def simulate_endpoints(
    env: StaticEnvironment,
    speed: Speed,
    starts,
    horizon: float,
    rng: np.random.Generator,
    frame: int = 1,
    stop_mask: np.ndarray | None = None,
) -> EndpointBatch:
    """
    Run many walkers in lock-step to the horizon, or until they leave the
    stop set (a boolean array over the window) when one is given.
    """
    starts = np.asarray(starts, dtype=np.int64).reshape(-1, 2)
    m = len(starts)
    L = env.half_width
    rates = _rates(env, speed)
    cumulative = np.cumsum(env.incident, axis=0)
    mu = env.mu_array

    pos = starts.copy()
    t = np.zeros(m)
    jumps = np.zeros(m, dtype=np.int64)
    aborted = np.zeros(m, dtype=bool)
    exited = np.zeros(m, dtype=bool)
    if (rates[pos[:, 0] + L, pos[:, 1] + L] <= 0).any():
        raise DomainError("Some start sites are isolated")

    active = np.arange(m)
    while active.size:
        i, j = pos[active, 0] + L, pos[active, 1] + L
        t_new = t[active] + rng.exponential(1.0 / rates[i, j])
        done = t_new > horizon
        t[active[done]] = horizon

        movers = active[~done]
        t[movers] = t_new[~done]
        i, j = i[~done], j[~done]
        u = rng.random(movers.size) * mu[i, j]
        k = (cumulative[:, i, j] <= u).sum(axis=0)
        pos[movers] += STEPS[k]
        jumps[movers] += 1

        still = np.ones(movers.size, dtype=bool)
        if frame:
            hit = _in_frame(env, frame, pos[movers, 0], pos[movers, 1])
            aborted[movers[hit]] = True
            still &= ~hit
        if stop_mask is not None:
            left = ~stop_mask[pos[movers, 0] + L, pos[movers, 1] + L]
            exited[movers[left & still]] = True
            still &= ~left
        active = movers[still]

    return EndpointBatch(starts, pos, t, jumps, aborted, exited)


def sample_cluster_starts(
    geometry: ClusterGeometry,
    count: int,
    radius: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw start sites uniformly from the box of the given radius, rejecting off-cluster ones."""
    L = geometry.window.half_width
    if not geometry.giant_mask[L - radius : L + radius + 1, L - radius : L + radius + 1].any():
        raise EstimationError(f"No giant-cluster site within radius {radius} of the centre")
    out = np.empty((0, 2), dtype=np.int64)
    while len(out) < count:
        draws = rng.integers(-radius, radius + 1, size=(2 * count, 2))
        keep = geometry.giant_mask[draws[:, 0] + L, draws[:, 1] + L]
        out = np.concatenate([out, draws[keep]])
    return out[:count]


def _jackknife(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and jackknife standard error over the first axis."""
    n = len(samples)
    mean = samples.mean(axis=0)
    if n < 2:
        return mean, np.full_like(mean, math.nan)
    leave_one_out = (samples.sum(axis=0) - samples) / (n - 1)
    spread = ((leave_one_out - leave_one_out.mean(axis=0)) ** 2).sum(axis=0)
    return mean, np.sqrt((n - 1) / n * spread)


def estimate_sigma(
    law: ConductanceLaw,
    horizon: float,
    num_envs: int,
    num_walks: int,
    half_width: int,
    speed: Speed = Speed.VSRW,
    master_seed: int = 0,
    start_radius: int | None = None,
) -> SigmaEstimate:
    """
    Sigma^2 = E_0[X_T X_T^T] / T averaged over environments and walks.

    Start sites are drawn near the window centre on the giant cluster.
    Walkers reaching the window frame are excluded and counted as leak.

    Raises:
        EstimationError: if more than 0.1% of the walkers leak
    """
    if Speed(speed) != Speed.VSRW:
        logger.warning("Sigma^2 entering gbar is defined for the VSRW; estimating for CSRW")
    window = Window(half_width)
    start_radius = start_radius if start_radius is not None else max(1, half_width // 20)

    per_env, leaked, total = [], 0, 0
    for k in range(num_envs):
        env = sample_environment(law, window, derive_seed(master_seed, k))
        geometry = clusters(env)
        rng = rng_for(master_seed, k, 1)
        starts = sample_cluster_starts(geometry, num_walks, start_radius, rng)
        batch = simulate_endpoints(env, speed, starts, horizon, rng)
        leaked += int(batch.aborted.sum())
        total += batch.size
        kept = batch.displacements[~batch.aborted].astype(float)
        if not len(kept):
            raise EstimationError(
                f"Every walker leaked in environment {k}; raise L above {half_width}"
            )
        per_env.append(np.einsum("ni,nj->ij", kept, kept) / (len(kept) * horizon))
        logger.debug(f"Sigma env {k}: diag {np.diag(per_env[-1])}, leaked {batch.aborted.sum()}")

    leak = leaked / total
    if leak > LEAK_BUDGET:
        raise EstimationError(
            f"{leak:.2%} of walkers reached the window frame (budget {LEAK_BUDGET:.1%}); "
            f"raise L above {half_width} or shorten the horizon {horizon:g}"
        )
    samples = np.array(per_env)
    matrix, errors = _jackknife(samples)
    matrix = (matrix + matrix.T) / 2
    estimate = SigmaEstimate(
        matrix=matrix,
        std_errors=errors,
        num_envs=num_envs,
        num_walks=num_walks,
        horizon=horizon,
        leak_fraction=leak,
        per_env=tuple(per_env),
    )
    logger.info(
        f"Sigma^2 = [[{matrix[0, 0]:.4f}, {matrix[0, 1]:.4f}], [{matrix[1, 0]:.4f}, "
        f"{matrix[1, 1]:.4f}]] from {num_envs} x {num_walks} walks (leak {leak:.2e})"
    )
    return estimate


def gbar_from(sigma, theta_hat: float, theta_err: float = 0.0) -> GbarEstimate:
    """
    gbar = 1 / (pi sqrt(det Sigma^2) theta) with first-order error propagation.

    Args:
        sigma: SigmaEstimate or a 2x2 matrix (then without error)
        theta_hat: estimate of P[0 in C_inf]
        theta_err: its standard error
    """
    if isinstance(sigma, SigmaEstimate):
        matrix, errors = sigma.matrix, np.nan_to_num(sigma.std_errors)
    else:
        matrix, errors = np.asarray(sigma, dtype=float), np.zeros((2, 2))
    det = float(matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0])
    if det <= 0 or theta_hat <= 0:
        raise EstimationError(
            f"Cannot form gbar from det Sigma^2 = {det:.4g}, theta = {theta_hat:.4g}"
        )
    gbar = 1.0 / (math.pi * math.sqrt(det) * theta_hat)
    det_var = (
        (matrix[1, 1] * errors[0, 0]) ** 2
        + (matrix[0, 0] * errors[1, 1]) ** 2
        + (2 * matrix[0, 1] * errors[0, 1]) ** 2
    )
    relative = math.sqrt(0.25 * det_var / det**2 + (theta_err / theta_hat) ** 2)
    return GbarEstimate(gbar=gbar, std_error=gbar * relative)


def _reaches_outside(env: StaticEnvironment, component, sites: set[Site]) -> bool:
    L = env.half_width
    for s in component:
        for k, d in enumerate(DIRECTIONS):
            if env.incident[k, s.x + L, s.y + L] > 0 and Site(s.x + d.x, s.y + d.y) not in sites:
                return True
    return False


def exit_statistics(
    env: StaticEnvironment,
    speed: Speed,
    x0,
    domain: Iterable,
    num_walks: int,
    seed: int,
) -> ExitStatistics:
    """
    Monte Carlo exit time and exit-site histogram of a finite set A.

    Raises:
        DomainError: if x0 is not in A or its open component cannot leave A
        EstimationError: if fewer than two walks are requested
    """
    if num_walks < 2:
        raise EstimationError(f"Exit statistics need at least two walks, got {num_walks}")
    x0 = Site(*x0)
    sites = {Site(*s) for s in domain}
    if x0 not in sites:
        raise DomainError(f"Start site {tuple(x0)} is not in the domain")
    L = env.half_width
    mask = np.zeros(env.window.shape, dtype=bool)
    for s in sites:
        if not env.window.interior(s):
            raise DomainError(f"Domain site {tuple(s)} has an incomplete stencil")
        mask[s.x + L, s.y + L] = True
    if not _reaches_outside(env, component_within(env, sites, x0), sites):
        raise DomainError(
            f"The open component of {tuple(x0)} never leaves the domain; the exit time is infinite"
        )

    rng = np.random.Generator(np.random.Philox(seed))
    starts = np.tile(np.array(x0, dtype=np.int64), (num_walks, 1))
    batch = simulate_endpoints(env, speed, starts, math.inf, rng, frame=0, stop_mask=mask)
    times = batch.times[batch.exited]
    histogram = Counter(Site(int(a), int(b)) for a, b in batch.positions[batch.exited])
    return ExitStatistics(
        mean_time=float(times.mean()),
        std_error=float(times.std(ddof=1) / math.sqrt(len(times))),
        histogram=dict(histogram),
        num_walks=num_walks,
        aborted=int((~batch.exited).sum()),
    )


def chi_square_test(
    observed: Mapping | Iterable,
    probabilities: Mapping | Iterable,
    min_expected: float = 5.0,
) -> ChiSquareResult:
    """
    Pearson chi-square goodness of fit; cells with expected count below
    min_expected are pooled into one.
    """
    if isinstance(probabilities, Mapping):
        keys = list(probabilities)
        observed = dict(observed) if isinstance(observed, Mapping) else dict(enumerate(observed))
        extra = sum(v for k, v in observed.items() if k not in probabilities)
        if extra:
            raise EstimationError(f"{extra} observations fall outside the support of the model")
        counts = np.array([observed.get(k, 0) for k in keys], dtype=float)
        probs = np.array([probabilities[k] for k in keys], dtype=float)
    else:
        counts = np.asarray(list(observed), dtype=float)
        probs = np.asarray(list(probabilities), dtype=float)
    probs = probs / probs.sum()
    expected = counts.sum() * probs

    small = expected < min_expected
    pooled = int(small.sum())
    if pooled:
        counts = np.append(counts[~small], counts[small].sum())
        expected = np.append(expected[~small], expected[small].sum())
        if expected[-1] < min_expected and len(expected) > 1:
            counts[-2] += counts[-1]
            expected[-2] += expected[-1]
            counts, expected = counts[:-1], expected[:-1]
    if len(counts) < 2:
        return ChiSquareResult(statistic=0.0, p_value=1.0, dof=0, pooled_cells=pooled)
    result = stats.chisquare(counts, expected)
    return ChiSquareResult(
        statistic=float(result.statistic),
        p_value=float(result.pvalue),
        dof=len(counts) - 1,
        pooled_cells=pooled,
    )


def occupation_fractions(trajectory: Trajectory) -> dict[Site, float]:
    """Fraction of [0, horizon] spent at each visited site."""
    edges = np.concatenate([[0.0], trajectory.times, [trajectory.horizon]])
    durations = np.diff(edges)
    visited = [trajectory.start] + [Site(int(a), int(b)) for a, b in trajectory.sites]
    total = Counter()
    for s, d in zip(visited, durations, strict=True):
        total[s] += d
    span = edges[-1]
    return {s: v / span for s, v in total.items()}
