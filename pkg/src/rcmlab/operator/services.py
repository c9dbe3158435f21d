"""
Finite-volume potential theory on a conductance environment.

Every quantity here reduces to one sparse symmetric positive definite solve
with the stiffness matrix of the domain. The speed measure only enters
through theta, which cancels from killed Green functions and harmonic
functions, so both are speed-independent by construction.
"""

import logging
import math
import time
from collections import deque
from collections.abc import Callable, Iterable, Mapping

import numpy as np
from django.conf import settings
from scipy import sparse
from scipy.sparse.linalg import cg, spsolve

from rcmlab.environment import Speed, StaticEnvironment
from rcmlab.exceptions import DomainError, SolverError
from rcmlab.lattice import DIRECTIONS, Site
from rcmlab.percolation import clusters

from .models import Boundary, Generator, SiteField, SolverMethod, SolveReport

logger = logging.getLogger(__name__)


def _as_sites(domain: Iterable) -> list[Site]:
    return sorted({Site(*s) for s in domain})


def assemble(
    env: StaticEnvironment,
    speed: Speed,
    domain: Iterable,
    boundary: Boundary = Boundary.DIRICHLET,
) -> Generator:
    """
    Assemble L_theta on a domain of window-interior sites.

    Raises:
        DomainError: if a domain site lacks a full stencil or has theta = 0
    """
    speed, boundary = Speed(speed), Boundary(boundary)
    sites = _as_sites(domain)
    if not sites:
        raise DomainError("Cannot assemble a generator on an empty domain")
    window = env.window
    for s in sites:
        if not window.interior(s):
            raise DomainError(
                f"Domain site {tuple(s)} has an incomplete stencil in window "
                f"of half-width {window.half_width}"
            )

    n = len(sites)
    L = window.half_width
    i = np.array([s.x for s in sites]) + L
    j = np.array([s.y for s in sites]) + L
    theta = env.theta_array(speed)[i, j]
    if (theta <= 0).any():
        bad = sites[int(np.argmin(theta))]
        raise DomainError(f"Domain site {tuple(bad)} has theta = 0 (isolated under CSRW)")

    position = np.full(window.shape, -1, dtype=np.int64)
    position[i, j] = np.arange(n)
    rows = np.arange(n)

    diag = np.zeros(n)
    off_rows, off_cols, off_vals = [], [], []
    ext_rows, ext_sites, ext_vals = [], [], []
    for k, d in enumerate(DIRECTIONS):
        w = env.incident[k, i, j]
        p = position[i + d.x, j + d.y]
        inside = p >= 0
        off_rows.append(rows[inside])
        off_cols.append(p[inside])
        off_vals.append(-w[inside])
        if boundary == Boundary.DIRICHLET:
            diag += w
            outside = ~inside
            ext_rows.append(rows[outside])
            targets = zip(i[outside] + d.x, j[outside] + d.y, strict=True)
            ext_sites.extend(Site(int(x) - L, int(y) - L) for x, y in targets)
            ext_vals.append(w[outside])
        else:
            diag += np.where(inside, w, 0.0)

    stiffness = sparse.coo_matrix(
        (
            np.concatenate([diag, *off_vals]),
            (np.concatenate([rows, *off_rows]), np.concatenate([rows, *off_cols])),
        ),
        shape=(n, n),
    ).tocsr()

    exterior = tuple(sorted(set(ext_sites)))
    exterior_index = {s: k for k, s in enumerate(exterior)}
    if exterior:
        cols = np.array([exterior_index[s] for s in ext_sites], dtype=np.int64)
        coupling = sparse.coo_matrix(
            (np.concatenate(ext_vals), (np.concatenate(ext_rows), cols)),
            shape=(n, len(exterior)),
        ).tocsr()
    else:
        coupling = sparse.csr_matrix((n, 0))

    return Generator(
        env=env,
        speed=speed,
        domain=tuple(sites),
        index={s: k for k, s in enumerate(sites)},
        theta=theta,
        stiffness=stiffness,
        exterior=exterior,
        exterior_index=exterior_index,
        coupling=coupling,
        boundary=boundary,
    )


def apply(gen: Generator, f: Mapping | Callable) -> np.ndarray:
    """
    Evaluate (L f)(x) for every domain site.

    Args:
        gen: assembled generator
        f: values on the domain and on its outside neighbours, as a mapping
            from sites or a callable on sites
    """
    value = f if callable(f) else (lambda s: f[Site(*s)])
    f_domain = np.array([value(s) for s in gen.domain], dtype=float)
    out = -(gen.stiffness @ f_domain)
    if gen.exterior:
        f_ext = np.array([value(s) for s in gen.exterior], dtype=float)
        out += gen.coupling @ f_ext
    return out / gen.theta


def solve_spd(
    matrix: sparse.spmatrix,
    rhs: np.ndarray,
    method: SolverMethod | str | None = None,
    tol: float | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """
    Solve a symmetric positive definite system.

    CG runs with a Jacobi preconditioner, relative residual tol and an
    iteration cap of 50 sqrt(n) (at least 100).

    Raises:
        SolverError: if CG does not reach tol within the cap
    """
    method = SolverMethod(method or settings.RCM_LAB_SOLVER)
    tol = settings.RCM_LAB_SOLVER_TOL if tol is None else tol
    n = matrix.shape[0]
    rhs_norm = float(np.linalg.norm(rhs))
    start = time.perf_counter()

    if rhs_norm == 0.0:
        return np.zeros(n), SolveReport(0.0, 0, tol, 0.0, method, n)

    if method == SolverMethod.DIRECT:
        solution = np.atleast_1d(spsolve(sparse.csc_matrix(matrix), rhs))
        iterations = 1
    else:
        cap = max(int(50 * math.sqrt(n)), 100)
        counter = [0]

        def count(_):
            counter[0] += 1

        preconditioner = sparse.diags(1.0 / matrix.diagonal())
        solution, info = cg(
            matrix, rhs, rtol=tol, atol=0.0, maxiter=cap, M=preconditioner, callback=count
        )
        iterations = counter[0]
        if info != 0:
            residual = float(np.linalg.norm(rhs - matrix @ solution)) / rhs_norm
            report = SolveReport(residual, iterations, tol, time.perf_counter() - start, method, n)
            raise SolverError(
                f"CG did not converge on {n} unknowns within {cap} iterations "
                f"(residual {residual:.3e}, tol {tol:.1e})",
                report=report,
            )
        if iterations > cap // 2:
            logger.warning(f"Slow CG convergence: {iterations} of {cap} iterations on {n} unknowns")

    residual = float(np.linalg.norm(rhs - matrix @ solution)) / rhs_norm
    report = SolveReport(residual, iterations, tol, time.perf_counter() - start, method, n)
    logger.debug(
        f"{method} solve on {n} unknowns: {iterations} iterations, residual {residual:.2e}, "
        f"{report.wall_time:.3f}s"
    )
    return solution, report


def component_within(env: StaticEnvironment, domain: Iterable, x) -> list[Site]:
    """Sites of the domain joined to x by open edges without leaving the domain."""
    allowed = {Site(*s) for s in domain}
    x = Site(*x)
    if x not in allowed:
        raise DomainError(f"Site {tuple(x)} is not in the domain")
    incident = env.incident
    L = env.half_width
    seen = {x}
    queue = deque([x])
    while queue:
        s = queue.popleft()
        for k, d in enumerate(DIRECTIONS):
            t = Site(s.x + d.x, s.y + d.y)
            if t in allowed and t not in seen and incident[k, s.x + L, s.y + L] > 0:
                seen.add(t)
                queue.append(t)
    return sorted(seen)


def _require_cluster(env: StaticEnvironment, x: Site):
    geometry = clusters(env)
    if geometry.trivial or not geometry.contains(x):
        raise DomainError(f"Site {tuple(x)} is not on the giant cluster")


def killed_green(
    env: StaticEnvironment,
    speed: Speed,
    domain: Iterable,
    y,
    method: SolverMethod | str | None = None,
    tol: float | None = None,
) -> tuple[SiteField, SolveReport]:
    """
    g_A(., y): the theta-normalised occupation density at y before leaving A.

    Solves K u = e_y on the component of y within A; sites of A in other
    components have g = 0.

    Raises:
        DomainError: if y is not in A or not on the giant cluster
        SolverError: on non-convergence
    """
    y = Site(*y)
    _require_cluster(env, y)
    component = component_within(env, domain, y)
    gen = assemble(env, speed, component)
    rhs = np.zeros(gen.size)
    rhs[gen.index[y]] = 1.0
    u, report = solve_spd(gen.stiffness, rhs, method, tol)
    return SiteField(gen.domain, u, gen.index), report


def _boundary_values(gen: Generator, values: Mapping | Callable) -> np.ndarray:
    """Boundary data on the exterior of gen; required only where an open edge reaches."""
    reached = np.asarray(abs(gen.coupling).sum(axis=0)).ravel() > 0
    out = np.zeros(len(gen.exterior))
    for k, z in enumerate(gen.exterior):
        if not reached[k]:
            continue
        if callable(values):
            out[k] = values(z)
        else:
            try:
                out[k] = values[z]
            except KeyError as e:
                raise DomainError(f"Boundary value missing at {tuple(z)}") from e
    return out


def harmonic_extension(
    env: StaticEnvironment,
    speed: Speed,
    domain: Iterable,
    boundary_values: Mapping | Callable,
    method: SolverMethod | str | None = None,
    tol: float | None = None,
) -> tuple[SiteField, SolveReport]:
    """
    The function h with L h = 0 on A intersect the giant cluster and h = F
    outside, i.e. h(x) = E_x[F(X at the exit time of A)].

    The speed measure does not change h; it is accepted for interface symmetry.
    """
    geometry = clusters(env)
    sites = [s for s in _as_sites(domain) if geometry.contains(s)]
    if not sites:
        raise DomainError("Domain does not meet the giant cluster")
    gen = assemble(env, speed, sites)
    rhs = gen.coupling @ _boundary_values(gen, boundary_values)
    h, report = solve_spd(gen.stiffness, rhs, method, tol)
    return SiteField(gen.domain, h, gen.index), report


def exit_functional(
    env: StaticEnvironment,
    x,
    domain: Iterable,
    boundary_values: Mapping | Callable,
    method: SolverMethod | str | None = None,
    tol: float | None = None,
) -> float:
    """E_x[F(X_tau)] for the exit time tau of A."""
    x = Site(*x)
    _require_cluster(env, x)
    component = component_within(env, domain, x)
    gen = assemble(env, Speed.VSRW, component)
    rhs = gen.coupling @ _boundary_values(gen, boundary_values)
    h, _ = solve_spd(gen.stiffness, rhs, method, tol)
    return float(h[gen.index[x]])


def harmonic_measure(
    env: StaticEnvironment,
    x,
    domain: Iterable,
    method: SolverMethod | str | None = None,
    tol: float | None = None,
) -> dict[Site, float]:
    """Exit distribution P_x[X_tau = z] = sum_w g_A(x, w) omega({w, z})."""
    x = Site(*x)
    _require_cluster(env, x)
    component = component_within(env, domain, x)
    gen = assemble(env, Speed.VSRW, component)
    rhs = np.zeros(gen.size)
    rhs[gen.index[x]] = 1.0
    g, _ = solve_spd(gen.stiffness, rhs, method, tol)
    weights = gen.coupling.T @ g
    return {z: float(p) for z, p in zip(gen.exterior, weights, strict=True) if p > 0}


def expected_exit_time(
    env: StaticEnvironment,
    speed: Speed,
    x,
    domain: Iterable,
    method: SolverMethod | str | None = None,
    tol: float | None = None,
) -> float:
    """E_x[tau_A] = sum_y g_A(x, y) theta(y)."""
    x = Site(*x)
    _require_cluster(env, x)
    component = component_within(env, domain, x)
    gen = assemble(env, speed, component)
    rhs = np.zeros(gen.size)
    rhs[gen.index[x]] = 1.0
    g, _ = solve_spd(gen.stiffness, rhs, method, tol)
    return float(g @ gen.theta)
