"""Sampling environments, checking moment conditions and shifting."""

import logging

import numpy as np

from rcmlab.exceptions import DomainError
from rcmlab.lattice import Site, Window
from rcmlab.seeding import rng_for

from .models import (
    ConductanceLaw,
    MomentReport,
    PositiveLaw,
    ShiftedEnvironment,
    StaticEnvironment,
)

logger = logging.getLogger(__name__)

# Side of the square blocks the plane is tiled into for seeding. Every block
# owns its own RNG stream, so an edge's value depends only on (seed, edge).
BLOCK = 32


def sample_environment(law: ConductanceLaw, window: Window, seed: int) -> StaticEnvironment:
    """
    Sample i.i.d. conductances on every edge of the window.

    Each edge is keyed by the coordinates of its lower-left endpoint and its
    direction. Growing the window never changes the values already sampled
    for a given seed.
    """
    L = window.half_width
    east = np.zeros(window.shape)
    north = np.zeros(window.shape)

    lo, hi = -L // BLOCK, L // BLOCK
    for bx in range(lo, hi + 1):
        for by in range(lo, hi + 1):
            u = rng_for(seed, bx, by).random((4, BLOCK, BLOCK))
            # Block (bx, by) covers sites bx*BLOCK .. bx*BLOCK + BLOCK - 1
            x0, y0 = bx * BLOCK, by * BLOCK
            xa, xb = max(x0, -L), min(x0 + BLOCK - 1, L)
            ya, yb = max(y0, -L), min(y0 + BLOCK - 1, L)
            if xa > xb or ya > yb:
                continue
            src = (slice(xa - x0, xb - x0 + 1), slice(ya - y0, yb - y0 + 1))
            dst = (slice(xa + L, xb + L + 1), slice(ya + L, yb + L + 1))
            east[dst] = np.where(u[0][src] < law.p_open, law.inverse_cdf(u[1][src]), 0.0)
            north[dst] = np.where(u[2][src] < law.p_open, law.inverse_cdf(u[3][src]), 0.0)

    east[-1, :] = 0.0
    north[:, -1] = 0.0
    env = StaticEnvironment(window, east, north, seed=seed, law=law)
    logger.debug(
        f"Sampled {law.describe()} on L={L} with seed {seed}: "
        f"open fraction {env.open_fraction():.4f}"
    )
    return env


def _non_explosion_note(law: ConductanceLaw) -> str:
    if law.lower_bound > 0:
        return (
            f"satisfied by construction: open conductances are at least {law.lower_bound}, "
            "so the speed measure is bounded below on the cluster"
        )
    return (
        "not checkable by a finite computation: conductances accumulate at 0; "
        "holds for VSRW (theta = 1), unverified for CSRW"
    )


def check_moment_condition(law: ConductanceLaw, p: float, q: float) -> MomentReport:
    """
    Closed-form check of E[omega^p] < inf, E[omega^-q; open] < inf and
    1/p + 1/q < 1 (the two-dimensional moment condition).

    Raises:
        DomainError: if p <= 1 or q <= 1
    """
    if p <= 1 or q <= 1:
        raise DomainError(f"Moment exponents must exceed 1, got p={p}, q={q}")

    positive = law.moment(p)
    negative = law.moment(-q)
    satisfied = bool(np.isfinite(positive) and np.isfinite(negative) and 1 / p + 1 / q < 1)
    if not satisfied and law.family in (PositiveLaw.PARETO, PositiveLaw.INVERSE_PARETO):
        logger.info(f"Moment condition fails for {law.describe()} at p={p}, q={q}")
    return MomentReport(
        p=p,
        q=q,
        positive_moment=positive,
        negative_moment=negative,
        satisfied=satisfied,
        non_explosion=_non_explosion_note(law),
    )


def shift(env, z) -> ShiftedEnvironment:
    """The lazy view tau_z env; shifting a view composes the offsets."""
    z = Site(*z)
    if isinstance(env, ShiftedEnvironment):
        return ShiftedEnvironment(env.base, env.offset + z)
    return ShiftedEnvironment(env, z)


def mu(env, x) -> float:
    """Sum of the four conductances incident to x."""
    return env.mu(Site(*x))
