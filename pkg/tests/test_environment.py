"""Tests for conductance laws, sampling and moment checks."""

import math

import numpy as np
import pytest

from rcmlab.environment import (
    ConductanceLaw,
    Speed,
    StaticEnvironment,
    check_moment_condition,
    sample_environment,
    shift,
)
from rcmlab.exceptions import ConfigurationError, DomainError
from rcmlab.lattice import Window


class TestConductanceLaw:
    def test_invalid_parameters(self):
        with pytest.raises(ConfigurationError):
            ConductanceLaw(p_open=0.0)
        with pytest.raises(ConfigurationError):
            ConductanceLaw.uniform(1.5, 0.5)
        with pytest.raises(ConfigurationError):
            ConductanceLaw.pareto(-1.0)

    def test_moments(self):
        assert ConductanceLaw.uniform(0.5, 1.5).moment(1) == pytest.approx(1.0)
        assert ConductanceLaw.constant(2.0, p_open=0.5).moment(2) == pytest.approx(2.0)
        assert math.isinf(ConductanceLaw.pareto(3.0).moment(3))
        assert math.isinf(ConductanceLaw.inverse_pareto(2.0).moment(-2))

    def test_draws_respect_support(self):
        u = np.linspace(0, 0.999, 200)
        assert (ConductanceLaw.pareto(2.0, scale=1.5).inverse_cdf(u) >= 1.5).all()
        draws = ConductanceLaw.inverse_pareto(2.0).inverse_cdf(u)
        assert (draws > 0).all() and (draws <= 1.0).all()


class TestMomentCondition:
    """The two-dimensional condition is 1/p + 1/q < 1 with both moments finite."""

    def test_bounded_law_passes(self):
        report = check_moment_condition(ConductanceLaw.uniform(0.5, 1.5), 4, 4)
        assert report.satisfied
        assert "by construction" in report.non_explosion

    def test_boundary_exponents_fail(self):
        assert not check_moment_condition(ConductanceLaw.uniform(0.5, 1.5), 2, 2).satisfied

    def test_heavy_tail_fails(self):
        assert not check_moment_condition(ConductanceLaw.pareto(3.0), 4, 4).satisfied

    def test_exponents_must_exceed_one(self):
        with pytest.raises(DomainError):
            check_moment_condition(ConductanceLaw(), 1, 4)


class TestSampling:
    def test_reproducible(self):
        law = ConductanceLaw.uniform(0.5, 1.5, p_open=0.8)
        a = sample_environment(law, Window(6), seed=11)
        b = sample_environment(law, Window(6), seed=11)
        assert np.array_equal(a.east, b.east)
        assert np.array_equal(a.north, b.north)

    def test_growing_the_window_keeps_values(self):
        law = ConductanceLaw.uniform(0.5, 1.5, p_open=0.8)
        small = sample_environment(law, Window(5), seed=2)
        large = sample_environment(law, Window(40), seed=2)
        # drop the last row/column, whose outgoing edges are zeroed in the small window
        assert np.array_equal(small.east[:-1, :], large.east[35:45, 35:46])
        assert np.array_equal(small.north[:, :-1], large.north[35:46, 35:45])

    def test_open_fraction(self):
        env = sample_environment(ConductanceLaw.constant(p_open=0.6), Window(30), seed=5)
        assert env.open_fraction() == pytest.approx(0.6, abs=0.03)

    def test_outgoing_edges_are_closed(self, uniform_env):
        assert not uniform_env.east[-1, :].any()
        assert not uniform_env.north[:, -1].any()


class TestStaticEnvironment:
    def test_homogeneous_speed_measure(self, homogeneous_env):
        assert homogeneous_env.mu((0, 0)) == 4.0
        assert homogeneous_env.theta(Speed.VSRW, (0, 0)) == 1.0
        assert homogeneous_env.theta(Speed.CSRW, (0, 0)) == 4.0

    def test_mu_needs_full_stencil(self, homogeneous_env):
        with pytest.raises(DomainError):
            homogeneous_env.mu((12, 0))

    def test_from_arrays_validates(self):
        east = np.ones((5, 5))
        north = np.ones((5, 5))
        with pytest.raises(ConfigurationError):
            StaticEnvironment.from_arrays(east, north)
        east[-1, :] = 0.0
        north[:, -1] = 0.0
        env = StaticEnvironment.from_arrays(east, north)
        assert env.half_width == 2
        east[0, 0] = -1.0
        with pytest.raises(ConfigurationError):
            StaticEnvironment.from_arrays(east, north)

    def test_from_arrays_needs_odd_square(self):
        with pytest.raises(ConfigurationError):
            StaticEnvironment.from_arrays(np.zeros((4, 4)), np.zeros((4, 4)))

    def test_shift(self, uniform_env):
        view = shift(uniform_env, (1, 0))
        assert view.between((0, 0), (1, 0)) == uniform_env.between((1, 0), (2, 0))
        assert shift(view, (0, 2)).between((0, 0), (0, 1)) == uniform_env.between((1, 2), (1, 3))

    def test_materialize(self, uniform_env):
        copy = shift(uniform_env, (2, -1)).materialize(5)
        assert copy.between((0, 0), (1, 0)) == uniform_env.between((2, -1), (3, -1))
        with pytest.raises(DomainError):
            shift(uniform_env, (8, 0)).materialize(5)
