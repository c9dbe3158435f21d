"""
The potential kernel a(x, y) and the identities linking it to killed Green
functions.

The primary route truncates to a ball B = B(center, n) on the cluster:

    a_n(x, y) = g_B(0, 0) - g_B(x, y),

which converges to a(x, y) as n grows. The time-integral route integrates
p_t(0, 0) - p_t(x, y) directly and is kept as an independent cross-check.
"""

import logging
import math
from collections.abc import Iterable

import numpy as np

from rcmlab.environment import Speed, StaticEnvironment
from rcmlab.exceptions import DomainError
from rcmlab.heatkernel import auto_radius, geometric_grid, heat_domain, propagate
from rcmlab.heatkernel.services import DEFAULT_LEAK_BUDGET, max_rate
from rcmlab.lattice import ORIGIN, Site, ball
from rcmlab.operator import (
    SiteField,
    SolverMethod,
    assemble,
    component_within,
    harmonic_extension,
    killed_green,
    solve_spd,
)
from rcmlab.percolation import clusters, nearest_cluster_point

from .models import (
    ExitIdentityReport,
    FTermPoint,
    PotentialEstimate,
    PotentialMethod,
    PuncturedIdentityReport,
)

logger = logging.getLogger(__name__)


def richardson_extrapolate(cutoffs, values) -> tuple[float, float, float]:
    """
    Extrapolate v(n) = v_inf + c n^-p to n -> inf.

    The order p is observed from the last three values (clamped to
    [0.5, 4]); with two values p = 1.

    Returns:
        (extrapolated value, order used, |extrapolated - last value|)
    """
    cutoffs = [float(c) for c in cutoffs]
    values = [float(v) for v in values]
    if len(values) < 2:
        return values[-1], 0.0, math.nan
    ratio = cutoffs[-1] / cutoffs[-2]
    order = 1.0
    if len(values) >= 3:
        d1 = values[-2] - values[-3]
        d2 = values[-1] - values[-2]
        if d1 != 0 and d2 != 0 and d1 / d2 > 0:
            observed = math.log(d1 / d2) / math.log(ratio)
            order = min(4.0, max(0.5, observed))
    correction = (values[-1] - values[-2]) / (ratio**order - 1)
    extrapolated = values[-1] + correction
    return extrapolated, order, abs(correction)


def _ball_domain(env: StaticEnvironment, n: int, center) -> list[Site]:
    """Component of the origin within B(center, n), on the giant cluster."""
    geometry = clusters(env)
    if not geometry.contains(ORIGIN):
        raise DomainError("The origin is not on the giant cluster")
    needed = abs(center[0]) + abs(center[1]) + n
    if needed > env.half_width - 1:
        raise DomainError(
            f"Ball B({tuple(center)}, {n}) does not fit inside window of half-width "
            f"{env.half_width}; need L >= {needed + 1}"
        )
    return component_within(env, ball(center, n), ORIGIN)


def _green_columns(env, speed, sites, columns, method, tol):
    """Solve K u = e_c on one domain for every requested column c."""
    gen = assemble(env, speed, sites)
    out, worst = {}, 0.0
    for c in dict.fromkeys(columns):
        if c not in gen.index:
            raise DomainError(f"Site {tuple(c)} lies outside the component of the origin")
        rhs = np.zeros(gen.size)
        rhs[gen.index[c]] = 1.0
        u, report = solve_spd(gen.stiffness, rhs, method, tol)
        out[c] = SiteField(gen.domain, u, gen.index)
        worst = max(worst, report.residual)
    return out, worst


def potential_column(
    env: StaticEnvironment,
    speed: Speed,
    y,
    n: int,
    center=ORIGIN,
    method: SolverMethod | str | None = None,
    tol: float | None = None,
) -> tuple[SiteField, float]:
    """
    a_n(., y) over the whole truncation ball, from at most two solves.

    Returns:
        (field of a_n(w, y), worst relative solver residual)
    """
    y, center = Site(*y), Site(*center)
    sites = _ball_domain(env, n, center)
    columns, residual = _green_columns(env, speed, sites, [ORIGIN, y], method, tol)
    g00 = columns[ORIGIN](ORIGIN)
    gy = columns[y]
    return SiteField(gy.sites, g00 - gy.values, gy.index), residual


def _green_difference(env, speed, x, y, n, center, method, tol):
    sites = _ball_domain(env, n, center)
    if x not in set(sites) or y not in set(sites):
        raise DomainError(
            f"Sites {tuple(x)}, {tuple(y)} are not both in the component of the origin "
            f"within B({tuple(center)}, {n})"
        )
    columns, residual = _green_columns(env, speed, sites, [ORIGIN, y], method, tol)
    return columns[ORIGIN](ORIGIN) - columns[y](x), residual


def potential_green_difference(
    env: StaticEnvironment,
    speed: Speed,
    x,
    y=ORIGIN,
    n: int = 64,
    center=ORIGIN,
    method: SolverMethod | str | None = None,
    tol: float | None = None,
) -> PotentialEstimate:
    """
    a(x, y) ~ g_B(0, 0) - g_B(x, y) with B = B(center, n) on the cluster.

    The error indicator is the change from cutoff n/2 to n (nan when x or y
    is not yet connected to the origin inside the smaller ball).

    Raises:
        DomainError: if x or y is outside C_n(0)
    """
    x, y, center = Site(*x), Site(*y), Site(*center)
    if x == y == ORIGIN:
        return PotentialEstimate(0.0, PotentialMethod.GREEN_DIFFERENCE, n, 0.0)
    value, residual = _green_difference(env, speed, x, y, n, center, method, tol)
    try:
        half, _ = _green_difference(env, speed, x, y, n // 2, center, method, tol)
        error = abs(value - half)
    except DomainError:
        half, error = math.nan, math.nan
    logger.debug(f"a({tuple(x)}, {tuple(y)}) ~ {value:.8f} at n={n} (n/2: {half:.8f})")
    return PotentialEstimate(
        value=value,
        method=PotentialMethod.GREEN_DIFFERENCE,
        cutoff=n,
        error=error,
        residual=residual,
        diagnostics={"half_cutoff_value": half},
    )


def _time_grid(t_switch: float, horizon: float, steps: int = 16) -> list[float]:
    linear = list(np.linspace(t_switch / steps, t_switch, steps))
    tail = [t for t in geometric_grid(t_switch, horizon) if t > t_switch]
    if not tail or tail[-1] < horizon:
        tail.append(horizon)
    return [float(t) for t in linear + tail]


def potential_time_integral(
    env: StaticEnvironment,
    speed: Speed,
    x,
    y=ORIGIN,
    horizon: float = 200.0,
    t_switch: float = 10.0,
    tol: float | None = None,
    leak_budget: float = DEFAULT_LEAK_BUDGET,
) -> PotentialEstimate:
    """
    a(x, y) ~ integral over [0, T] of p_t(0, 0) - p_t(x, y).

    Between grid points the integral is exact (uniformization); the grid is
    linear up to t_switch and geometric beyond, and the contribution of the
    last decade [T/10, T] is reported as the tail indicator.
    """
    x, y = Site(*x), Site(*y)
    if x == y == ORIGIN:
        return PotentialEstimate(0.0, PotentialMethod.TIME_INTEGRAL, horizon, 0.0)
    grid = _time_grid(min(t_switch, horizon), horizon)
    reach = max(abs(x.x), abs(x.y), abs(y.x), abs(y.y))
    radius = auto_radius(max_rate(env, speed), horizon, leak_budget) + reach
    sites = heat_domain(env, ORIGIN, radius)
    if x not in set(sites) or y not in set(sites):
        raise DomainError(f"Sites {tuple(x)}, {tuple(y)} are not connected to the origin")
    gen = assemble(env, speed, sites)

    from_origin = propagate(gen, ORIGIN, grid, tol)
    from_y = from_origin if y == ORIGIN else propagate(gen, y, grid, tol)

    # p_t(x, y) = p_t(y, x), read off the walk started at y
    pieces = np.array(
        [
            from_origin.integrated_density_at(k, ORIGIN) - from_y.integrated_density_at(k, x)
            for k in range(len(grid))
        ]
    )
    integrand = np.array(
        [from_origin.density_at(k, ORIGIN) - from_y.density_at(k, x) for k in range(len(grid))]
    )
    last_decade = np.array(grid) > horizon / 10
    tail = float(abs(pieces[last_decade].sum()))
    value = float(pieces.sum())
    logger.debug(f"a({tuple(x)}, {tuple(y)}) ~ {value:.8f} by time integral to T={horizon:g}")
    return PotentialEstimate(
        value=value,
        method=PotentialMethod.TIME_INTEGRAL,
        cutoff=horizon,
        error=tail,
        residual=from_origin.truncation[-1] + from_origin.leak(len(grid) - 1),
        diagnostics={"min_integrand": float(integrand.min()), "domain_size": gen.size},
    )


def _exit_expectation(env, speed, domain, x, values: dict, method, tol) -> float:
    """E_x[f(X_tau_A)] for boundary data f."""
    field, _ = harmonic_extension(env, speed, component_within(env, domain, x), values, method, tol)
    return field(x)


def check_lemma22_identity(
    env: StaticEnvironment,
    speed: Speed,
    domain: Iterable,
    x,
    y,
    n_ref: int,
    method: SolverMethod | str | None = None,
    tol: float | None = None,
) -> ExitIdentityReport:
    """
    Residual of g_A(x, y) = E_x[a(X_tau, y)] - a(x, y) for a finite set A.

    a(., y) is evaluated on the reference ball at cutoffs n_ref/4, n_ref/2
    and n_ref; each value is extrapolated separately for the residual.
    """
    x, y = Site(*x), Site(*y)
    domain = [Site(*s) for s in domain]
    green, _ = killed_green(env, speed, domain, y, method, tol)
    g_xy = green(x)

    cutoffs, columns = [], []
    for n in (n_ref // 4, n_ref // 2, n_ref):
        try:
            column, _ = potential_column(env, speed, y, n, method=method, tol=tol)
        except DomainError:
            if n == n_ref:
                raise
            continue
        cutoffs.append(n)
        columns.append(column)
    reference = columns[-1]

    sites = component_within(env, domain, x)
    gen = assemble(env, speed, sites)
    exterior = [z for z in gen.exterior if z in reference.index]

    def extrapolated(s) -> float:
        if any(s not in c.index for c in columns):
            return reference(s)
        return richardson_extrapolate(cutoffs, [c(s) for c in columns])[0]

    a_ref = {s: reference(s) for s in [*gen.domain, *exterior]}
    a_ext = {s: extrapolated(s) for s in a_ref}

    exit_ref = _exit_expectation(env, speed, sites, x, a_ref, method, tol)
    exit_ext = _exit_expectation(env, speed, sites, x, a_ext, method, tol)
    report = ExitIdentityReport(
        x=x,
        y=y,
        n_ref=n_ref,
        green=g_xy,
        exit_term=exit_ext,
        potential=a_ext[x],
        cutoff_residual=abs(g_xy - (exit_ref - a_ref[x])),
        residual=abs(g_xy - (exit_ext - a_ext[x])),
    )
    logger.info(
        f"Exit identity at x={tuple(x)}, y={tuple(y)}, n_ref={n_ref}: "
        f"residual {report.residual:.2e} (cutoff {report.cutoff_residual:.2e})"
    )
    return report


def check_corollary23(
    env: StaticEnvironment,
    speed: Speed,
    x,
    y,
    n_outer: int,
    method: SolverMethod | str | None = None,
    tol: float | None = None,
) -> PuncturedIdentityReport:
    """
    g_A(x, y) = a(0, y) - a(x, y) + a(x, 0) for A = cluster minus the origin,
    truncated to B(0, n_outer); a-values use the same ball.
    """
    x, y = Site(*x), Site(*y)
    if ORIGIN in (x, y):
        raise DomainError("x and y must differ from the origin")
    sites = _ball_domain(env, n_outer, ORIGIN)
    members = set(sites)
    if x not in members or y not in members:
        raise DomainError(f"Sites {tuple(x)}, {tuple(y)} are not in C_n(0) for n={n_outer}")
    columns, _ = _green_columns(env, speed, sites, [ORIGIN, y], method, tol)
    g00 = columns[ORIGIN](ORIGIN)

    def a(u, v) -> float:
        # a_n(u, v) = g_B(0, 0) - g_B(u, v), using symmetry of g_B
        if v == ORIGIN:
            return g00 - columns[ORIGIN](u)
        if u == ORIGIN:
            return g00 - columns[ORIGIN](v)
        return g00 - columns[v](u)

    combination = a(ORIGIN, y) - a(x, y) + a(x, ORIGIN)
    punctured = [s for s in sites if s != ORIGIN]
    g_y, _ = killed_green(env, speed, punctured, y, method, tol)
    g_x, _ = killed_green(env, speed, punctured, x, method, tol)

    table = []
    geometry = clusters(env)
    radius = 2
    while radius <= n_outer // 2:
        target = nearest_cluster_point(geometry, (radius, 0))
        if target in g_x.index and target != ORIGIN:
            table.append((target, g_x(target)))
        radius *= 2

    report = PuncturedIdentityReport(
        x=x,
        y=y,
        n_outer=n_outer,
        green=g_y(x),
        combination=combination,
        residual=abs(g_y(x) - combination),
        green_at_origin=g_y(ORIGIN),
        a_x0=a(x, ORIGIN),
        limit_table=tuple(table),
    )
    logger.info(
        f"Punctured identity at x={tuple(x)}, y={tuple(y)}, n={n_outer}: "
        f"residual {report.residual:.2e}"
    )
    return report


def f_term_estimate(
    env: StaticEnvironment,
    x,
    n_grid: Iterable[int],
    gbar: float,
    method: SolverMethod | str | None = None,
    tol: float | None = None,
) -> list[FTermPoint]:
    """
    gbar * P_x[tau_B(0,n) < tau_A] * ln n for A = cluster minus the origin.

    The probability is harmonic in B(0, n) minus the origin, 1 outside the
    ball and 0 at the origin. gbar belongs to the environment law (gbar_from
    on a Sigma^2 estimate); HOMOGENEOUS_GBAR holds only for unit conductances.
    """
    x = Site(*x)
    if x == ORIGIN:
        raise DomainError("x must differ from the origin")
    if gbar <= 0:
        raise DomainError(f"gbar must be positive, got {gbar}")
    points = []
    for n in sorted(n_grid):
        sites = [s for s in _ball_domain(env, n, ORIGIN) if s != ORIGIN]
        if x not in set(sites):
            raise DomainError(f"Site {tuple(x)} is not in C_n(0) for n={n}")
        field, _ = harmonic_extension(
            env,
            Speed.VSRW,
            component_within(env, sites, x),
            lambda z: 0.0 if z == ORIGIN else 1.0,
            method,
            tol,
        )
        probability = field(x)
        value = gbar * probability * math.log(n)
        points.append(FTermPoint(n=n, probability=probability, value=value))
        logger.debug(f"f-term at n={n}: P={probability:.6f}, value={points[-1].value:.6f}")
    return points
