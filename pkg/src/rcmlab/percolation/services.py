"""Cluster labelling, chemical distances and the percolation probability."""

import logging
from collections import deque
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from rcmlab.environment import ConductanceLaw, StaticEnvironment, sample_environment
from rcmlab.exceptions import DomainError
from rcmlab.lattice import DIRECTIONS, Site, Window, l1_distance
from rcmlab.seeding import derive_seed

from .models import ClusterGeometry, HolesReport, ThetaEstimate, UnionFind

logger = logging.getLogger(__name__)


def _open_edge_pairs(env: StaticEnvironment) -> tuple[np.ndarray, np.ndarray]:
    """Flat indices (u, v) of the endpoints of every open edge."""
    side = env.window.side
    flat = np.arange(side * side).reshape(side, side)
    ei, ej = np.nonzero(env.east > 0)
    ni, nj = np.nonzero(env.north > 0)
    u = np.concatenate([flat[ei, ej], flat[ni, nj]])
    v = np.concatenate([flat[ei + 1, ej], flat[ni, nj + 1]])
    return u, v


def _canonical_labels(raw: np.ndarray) -> np.ndarray:
    """Relabel components by their smallest flat site index."""
    smallest = np.full(raw.max() + 1, raw.size, dtype=np.int64)
    np.minimum.at(smallest, raw, np.arange(raw.size))
    return smallest[raw]


@lru_cache(maxsize=32)
def clusters(env: StaticEnvironment) -> ClusterGeometry:
    """
    Label the connected components of open edges by union-find.

    The giant component is the largest one; equal sizes are resolved in
    favour of the smallest label and flagged.
    """
    window = env.window
    uf = UnionFind(window.num_sites)
    for a, b in zip(*_open_edge_pairs(env), strict=True):
        uf.union(int(a), int(b))
    labels = uf.roots().reshape(window.shape)

    ids, counts = np.unique(labels, return_counts=True)
    sizes = {int(i): int(c) for i, c in zip(ids, counts, strict=True)}
    largest = counts.max()
    candidates = ids[counts == largest]
    giant_id = int(candidates.min())
    tie = len(candidates) > 1

    mask = labels == giant_id
    spans = bool(mask[0, :].any() and mask[-1, :].any() and mask[:, 0].any() and mask[:, -1].any())

    geometry = ClusterGeometry(
        window=window, labels=labels, giant_id=giant_id, sizes=sizes, tie=tie, spans=spans
    )
    if geometry.trivial:
        logger.warning(
            f"All edges closed in window L={window.half_width}: giant cluster is trivial"
        )
    elif tie:
        logger.warning(
            f"{len(candidates)} components tie for the giant at size {largest}; "
            f"picked label {giant_id}"
        )
    if not spans:
        logger.warning(
            f"Giant component (size {largest}) does not touch all four window sides; "
            "treat it as an unreliable proxy for the infinite cluster"
        )
    logger.debug(f"Labelled {len(sizes)} components, giant size {largest}")
    return geometry


def bfs_labels(env: StaticEnvironment) -> np.ndarray:
    """Component labels computed by graph traversal, in the same convention as clusters()."""
    n = env.window.num_sites
    u, v = _open_edge_pairs(env)
    adjacency = sparse.coo_matrix((np.ones(len(u)), (u, v)), shape=(n, n)).tocsr()
    _, raw = connected_components(adjacency, directed=False)
    return _canonical_labels(raw).reshape(env.window.shape)


def _open_neighbors(env: StaticEnvironment, s: Site):
    incident = env.incident
    i, j = env.window.index(s)
    for k, d in enumerate(DIRECTIONS):
        if incident[k, i, j] > 0:
            yield Site(s.x + d.x, s.y + d.y)


def component_in_ball(env: StaticEnvironment, x, n: int) -> set[Site]:
    """
    C_n(x): the sites joined to x by open paths inside B(x, n).

    Raises:
        DomainError: if x is not on the giant component
    """
    x = Site(*x)
    geometry = clusters(env)
    if not geometry.contains(x):
        raise DomainError(f"Site {tuple(x)} is not on the giant cluster")
    seen = {x}
    queue = deque([x])
    while queue:
        s = queue.popleft()
        for t in _open_neighbors(env, s):
            if t not in seen and l1_distance(t, x) < n:
                seen.add(t)
                queue.append(t)
    return seen


def nearest_cluster_point(geometry: ClusterGeometry | StaticEnvironment, target) -> Site:
    """
    The giant-component site closest to a real point in the Euclidean norm.

    Ties are broken lexicographically.
    """
    if isinstance(geometry, StaticEnvironment):
        geometry = clusters(geometry)
    tree = geometry.tree
    distance, _ = tree.query(target)
    candidates = tree.query_ball_point(target, distance + 1e-12)
    points = tree.data[candidates].astype(int)
    best = min(map(tuple, points.tolist()))
    return Site(*best)


def chemical_distance(env: StaticEnvironment, x, y) -> int | None:
    """Length of the shortest open path from x to y, or None when unreachable."""
    x, y = Site(*x), Site(*y)
    if x == y:
        return 0
    distance = {x: 0}
    queue = deque([x])
    while queue:
        s = queue.popleft()
        for t in _open_neighbors(env, s):
            if t in distance:
                continue
            distance[t] = distance[s] + 1
            if t == y:
                return distance[t]
            queue.append(t)
    return None


def estimate_theta(
    law: ConductanceLaw,
    half_width: int,
    num_seeds: int,
    master_seed: int = 0,
    interior_half_width: int | None = None,
) -> ThetaEstimate:
    """
    Estimate P[0 in C_inf] as the fraction of window sites on the giant
    component, averaged over independently seeded environments.

    Args:
        law: conductance law
        half_width: window half-width L
        num_seeds: number of environments
        master_seed: seeds are derived as derive_seed(master_seed, k)
        interior_half_width: restrict the count to a central box

    Returns:
        ThetaEstimate with the standard error across environments
    """
    if law.p_open <= 0.5:
        logger.warning(
            f"p_open={law.p_open} is not supercritical; the giant component is not "
            "a meaningful proxy for the infinite cluster"
        )
    window = Window(half_width)
    fractions = []
    spanning = 0
    for k in range(num_seeds):
        env = sample_environment(law, window, derive_seed(master_seed, k))
        geometry = clusters(env)
        fractions.append(geometry.giant_fraction(interior_half_width))
        spanning += geometry.spans
        logger.debug(f"theta seed {k}: giant fraction {fractions[-1]:.5f}")

    values = np.array(fractions)
    std_error = float(values.std(ddof=1) / np.sqrt(num_seeds)) if num_seeds > 1 else float("nan")
    estimate = ThetaEstimate(
        theta_hat=float(values.mean()),
        std_error=std_error,
        num_seeds=num_seeds,
        per_seed=tuple(fractions),
        spanning_fraction=spanning / num_seeds,
    )
    logger.info(
        f"theta_hat={estimate.theta_hat:.5f} +/- {estimate.std_error:.5f} "
        f"({num_seeds} seeds, L={half_width})"
    )
    return estimate


def holes_sandwich(geometry: ClusterGeometry, mesh, n: int) -> HolesReport:
    """Ratios |lambda_n(x)| / n for every unscaled mesh point x."""
    ratios = []
    for px, py in mesh:
        site = nearest_cluster_point(geometry, (n * px, n * py))
        ratios.append(float(np.hypot(site.x, site.y)) / n)
    return HolesReport(n=n, ratios=tuple(ratios))
