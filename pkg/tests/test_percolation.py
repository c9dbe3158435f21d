"""Tests for cluster labelling and cluster-point selection."""

import numpy as np
import pytest

from rcmlab.environment import ConductanceLaw, StaticEnvironment
from rcmlab.lattice import ORIGIN, Annulus, Site, annulus_targets, ball
from rcmlab.percolation import (
    UnionFind,
    bfs_labels,
    chemical_distance,
    clusters,
    component_in_ball,
    estimate_theta,
    holes_sandwich,
    nearest_cluster_point,
)


def _split_env():
    """Unit conductances on [-3, 3]^2 with every edge across x = 0 | x = 1 removed."""
    env = StaticEnvironment.homogeneous(3)
    east = np.array(env.east)
    east[3, :] = 0.0
    return StaticEnvironment.from_arrays(east, env.north)


class TestUnionFind:
    def test_roots_are_smallest_members(self):
        uf = UnionFind(6)
        uf.union(4, 2)
        uf.union(5, 4)
        uf.union(1, 3)
        assert uf.roots().tolist() == [0, 1, 2, 1, 2, 2]


class TestClusters:
    def test_homogeneous_is_one_component(self, homogeneous_env):
        geometry = clusters(homogeneous_env)
        assert geometry.num_components == 1
        assert geometry.giant_size == homogeneous_env.window.num_sites
        assert geometry.spans

    def test_union_find_matches_traversal(self, percolation_env):
        assert np.array_equal(clusters(percolation_env).labels, bfs_labels(percolation_env))

    def test_giant_is_largest(self, percolation_env):
        geometry = clusters(percolation_env)
        assert geometry.giant_size == max(geometry.sizes.values())

    def test_split_window(self):
        geometry = clusters(_split_env())
        # columns x <= 0 (28 sites) against x >= 1 (21 sites)
        assert geometry.giant_size == 28
        assert geometry.contains((0, 0))
        assert not geometry.contains((1, 0))
        assert not geometry.spans


class TestDistances:
    def test_chemical_distance_homogeneous(self, homogeneous_env):
        assert chemical_distance(homogeneous_env, (0, 0), (3, -2)) == 5

    def test_chemical_distance_disconnected(self):
        assert chemical_distance(_split_env(), (0, 0), (1, 0)) is None

    def test_component_in_ball(self, homogeneous_env):
        assert component_in_ball(homogeneous_env, ORIGIN, 3) == ball(ORIGIN, 3)


class TestNearestClusterPoint:
    def test_rounds_to_nearest_site(self, homogeneous_env):
        assert nearest_cluster_point(homogeneous_env, (2.4, -0.6)) == Site(2, -1)

    def test_ties_break_lexicographically(self, homogeneous_env):
        assert nearest_cluster_point(homogeneous_env, (0.5, 0.0)) == Site(0, 0)

    def test_skips_off_cluster_sites(self):
        env = _split_env()
        assert nearest_cluster_point(env, (1.2, 0.0)) == Site(0, 0)

    def test_holes_ratios_on_full_lattice(self, homogeneous_env):
        mesh = annulus_targets(Annulus(1.0, 2.0), 1, radii=2, angles=8)
        report = holes_sandwich(clusters(homogeneous_env), mesh, 4)
        assert report.min_ratio == pytest.approx(1.0, abs=0.2)
        assert report.max_ratio == pytest.approx(2.0, abs=0.2)


class TestTheta:
    def test_full_lattice(self):
        estimate = estimate_theta(ConductanceLaw.constant(), 6, 3, master_seed=1)
        assert estimate.theta_hat == 1.0
        assert estimate.std_error == 0.0
        assert estimate.spanning_fraction == 1.0

    def test_supercritical_between_zero_and_one(self):
        estimate = estimate_theta(ConductanceLaw.constant(p_open=0.75), 16, 4, master_seed=3)
        assert 0.5 < estimate.theta_hat < 1.0
        assert len(estimate.per_seed) == 4
