import math

import numpy as np
import pytest

from rcmlab.environment import ConductanceLaw, Speed, StaticEnvironment
from rcmlab.exceptions import DomainError, EstimationError
from rcmlab.lattice import ORIGIN, Site, ball
from rcmlab.montecarlo import (
    chi_square_test,
    estimate_sigma,
    exit_statistics,
    gbar_from,
    occupation_fractions,
    simulate,
    simulate_endpoints,
)
from rcmlab.operator import expected_exit_time, harmonic_measure
from rcmlab.potential import HOMOGENEOUS_GBAR


class TestSimulate:
    def test_same_seed_same_path(self, uniform_env):
        first = simulate(uniform_env, Speed.VSRW, ORIGIN, 5.0, seed=11)
        second = simulate(uniform_env, Speed.VSRW, ORIGIN, 5.0, seed=11)
        assert np.array_equal(first.times, second.times)
        assert np.array_equal(first.sites, second.sites)

    def test_path_is_nearest_neighbour(self, uniform_env):
        path = simulate(uniform_env, Speed.CSRW, ORIGIN, 5.0, seed=2)
        points = np.vstack([[0, 0], path.sites])
        assert (np.abs(np.diff(points, axis=0)).sum(axis=1) == 1).all()
        assert (np.diff(path.times) > 0).all()
        assert path.position_at(0.0) == ORIGIN
        assert path.position_at(5.0) == path.end

    def test_occupation_fractions_sum_to_one(self, homogeneous_env):
        path = simulate(homogeneous_env, Speed.VSRW, ORIGIN, 3.0, seed=5)
        fractions = occupation_fractions(path)
        assert sum(fractions.values()) == pytest.approx(1.0)
        assert ORIGIN in fractions

    def test_isolated_start(self):
        empty = StaticEnvironment.from_arrays(np.zeros((5, 5)), np.zeros((5, 5)))
        with pytest.raises(DomainError):
            simulate(empty, Speed.VSRW, ORIGIN, 1.0, seed=0)

    def test_frame_aborts_walkers(self):
        env = StaticEnvironment.homogeneous(3)
        rng = np.random.default_rng(0)
        batch = simulate_endpoints(env, Speed.VSRW, [(0, 0)] * 200, 50.0, rng)
        assert batch.leak_fraction > 0.9


class TestExitStatistics:
    """Monte Carlo exit laws against the linear-algebra answers."""

    def test_single_site_exit(self, homogeneous_env):
        stats = exit_statistics(homogeneous_env, Speed.VSRW, ORIGIN, [ORIGIN], 4000, seed=3)
        assert abs(stats.mean_time - 0.25) <= 4 * stats.std_error
        uniform = {Site(1, 0): 0.25, Site(-1, 0): 0.25, Site(0, 1): 0.25, Site(0, -1): 0.25}
        assert chi_square_test(stats.histogram, uniform).passes(0.001)

    def test_matches_harmonic_measure(self, uniform_env):
        domain = ball(ORIGIN, 3)
        stats = exit_statistics(uniform_env, Speed.VSRW, (1, 0), domain, 4000, seed=8)
        exact_time = expected_exit_time(uniform_env, Speed.VSRW, (1, 0), domain, method="direct")
        assert abs(stats.mean_time - exact_time) <= 4 * stats.std_error
        measure = harmonic_measure(uniform_env, (1, 0), domain, method="direct")
        assert sum(measure.values()) == pytest.approx(1.0)
        assert chi_square_test(stats.histogram, measure).passes(0.001)
        assert stats.aborted == 0

    def test_start_outside_domain(self, homogeneous_env):
        with pytest.raises(DomainError):
            exit_statistics(homogeneous_env, Speed.VSRW, (2, 0), [ORIGIN], 10, seed=0)

    def test_trapped_component(self):
        east = np.zeros((9, 9))
        east[4, 4] = 1.0
        env = StaticEnvironment.from_arrays(east, np.zeros((9, 9)))
        with pytest.raises(DomainError):
            exit_statistics(env, Speed.VSRW, ORIGIN, ball(ORIGIN, 3), 10, seed=0)

    def test_single_walk(self, homogeneous_env):
        with pytest.raises(EstimationError):
            exit_statistics(homogeneous_env, Speed.VSRW, ORIGIN, [ORIGIN], 1, seed=0)


class TestChiSquare:
    def test_exact_counts(self):
        result = chi_square_test([10, 20, 30, 40], [0.1, 0.2, 0.3, 0.4])
        assert result.statistic == pytest.approx(0.0)
        assert result.p_value == pytest.approx(1.0)
        assert result.dof == 3

    def test_small_cells_are_pooled(self):
        result = chi_square_test([50, 49, 1], [0.5, 0.49, 0.01])
        assert result.pooled_cells == 1
        assert result.dof == 1

    def test_outside_support(self):
        with pytest.raises(EstimationError):
            chi_square_test({"a": 5, "b": 1}, {"a": 1.0})


class TestSigma:
    def test_homogeneous_covariance(self):
        estimate = estimate_sigma(
            ConductanceLaw.constant(1.0),
            horizon=20.0,
            num_envs=2,
            num_walks=2000,
            half_width=40,
            master_seed=4,
        )
        assert estimate.matrix[0, 0] == pytest.approx(2.0, abs=0.2)
        assert estimate.matrix[1, 1] == pytest.approx(2.0, abs=0.2)
        assert estimate.matrix[0, 1] == pytest.approx(0.0, abs=0.2)
        assert estimate.leak_fraction == 0.0

    def test_leaking_window(self):
        with pytest.raises(EstimationError):
            estimate_sigma(
                ConductanceLaw.constant(1.0),
                horizon=200.0,
                num_envs=1,
                num_walks=200,
                half_width=5,
            )


class TestGbar:
    def test_homogeneous_value(self):
        estimate = gbar_from(2 * np.eye(2), 1.0)
        assert estimate.gbar == pytest.approx(HOMOGENEOUS_GBAR)
        assert estimate.std_error == 0.0

    def test_theta_scales_inversely(self):
        assert gbar_from(2 * np.eye(2), 0.5).gbar == pytest.approx(1 / math.pi)

    def test_degenerate_matrix(self):
        with pytest.raises(EstimationError):
            gbar_from(np.array([[1.0, 1.0], [1.0, 1.0]]), 1.0)
