"""
Exact simulation of the walk among time-dependent conductances by thinning.

Every site carries a Poisson clock of rate 4 c_hi. At a ring at time t the
walk picks one of its four edges uniformly and crosses it with probability
omega_t(e) / c_hi, which dominates the true jump rate edge by edge.
"""

import logging

import numpy as np

from rcmlab.exceptions import DomainError, EllipticityError
from rcmlab.lattice import Site
from rcmlab.montecarlo import EndpointBatch, Trajectory
from rcmlab.montecarlo.services import STEPS

from ..models import DynamicEnvironment

logger = logging.getLogger(__name__)


def _accept_ratio(weight, c_hi: float, t: float):
    slack = 1e-12 * max(1.0, c_hi)
    if np.any(weight > c_hi + slack):
        raise EllipticityError(
            f"Conductance {float(np.max(weight)):.6g} exceeds the dominating bound "
            f"{c_hi} at time {t:.6g}"
        )
    return weight / c_hi


def _outside(limit: int, x, y):
    return (np.abs(x) > limit) | (np.abs(y) > limit)


def simulate_inhomogeneous(
    denv: DynamicEnvironment,
    x0,
    horizon: float,
    seed: int,
    frame: int = 1,
) -> Trajectory:
    """
    One path of the time-inhomogeneous walk with generator
    (L_t f)(x) = sum_y omega_t({x, y}) (f(y) - f(x)) on [0, horizon].

    Raises:
        EllipticityError: if a conductance met along the way exceeds c_hi
    """
    x0 = Site(*x0)
    if not denv.window.interior(x0):
        raise DomainError(f"Start site {tuple(x0)} is not inside the window interior")
    rng = np.random.Generator(np.random.Philox(seed))
    rate = 4.0 * denv.c_hi
    L = denv.window.half_width
    limit = L - frame

    t = 0.0
    x, y = x0
    times, sites = [], []
    aborted = False
    while True:
        t += rng.exponential(1.0 / rate)
        if t > horizon:
            break
        k = int(rng.integers(4))
        weight = denv.frame_at(t).incident[k, x + L, y + L]
        if rng.random() >= _accept_ratio(weight, denv.c_hi, t):
            continue
        x, y = x + int(STEPS[k, 0]), y + int(STEPS[k, 1])
        times.append(t)
        sites.append((x, y))
        if frame and _outside(limit, x, y):
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


def simulate_inhomogeneous_endpoints(
    denv: DynamicEnvironment,
    starts,
    horizon: float,
    rng: np.random.Generator,
    frame: int = 1,
) -> EndpointBatch:
    """
    Many walkers in lock-step, one time slot at a time.

    The frame is fixed within a slot and the proposal clock is memoryless,
    so every walker restarts its clock at each slot boundary.
    """
    starts = np.asarray(starts, dtype=np.int64).reshape(-1, 2)
    m = len(starts)
    L = denv.window.half_width
    limit = L - frame
    rate = 4.0 * denv.c_hi

    pos = starts.copy()
    jumps = np.zeros(m, dtype=np.int64)
    aborted = np.zeros(m, dtype=bool)
    if frame and _outside(limit, pos[:, 0], pos[:, 1]).any():
        raise DomainError("Some start sites lie in the window frame")

    slot = 0
    while slot * denv.slot_length < horizon and not aborted.all():
        incident = denv.frame(slot).incident
        begin = slot * denv.slot_length
        end = min((slot + 1) * denv.slot_length, horizon)
        t = np.full(m, begin)
        active = np.flatnonzero(~aborted)
        while active.size:
            t[active] += rng.exponential(1.0 / rate, active.size)
            active = active[t[active] <= end]
            k = rng.integers(4, size=active.size)
            weight = incident[k, pos[active, 0] + L, pos[active, 1] + L]
            accept = rng.random(active.size) < _accept_ratio(weight, denv.c_hi, begin)
            movers = active[accept]
            pos[movers] += STEPS[k[accept]]
            jumps[movers] += 1
            if frame:
                out = movers[_outside(limit, pos[movers, 0], pos[movers, 1])]
                aborted[out] = True
                active = active[~aborted[active]]
        slot += 1

    if aborted.any():
        logger.debug(f"{int(aborted.sum())} of {m} dynamic walkers reached the window frame")
    return EndpointBatch(
        starts=starts,
        positions=pos,
        times=np.full(m, float(horizon)),
        jumps=jumps,
        aborted=aborted,
        exited=np.zeros(m, dtype=bool),
    )
