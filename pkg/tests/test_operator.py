"""Tests for generator assembly and the Dirichlet solves built on it."""

import numpy as np
import pytest

from rcmlab.environment import Speed, StaticEnvironment
from rcmlab.exceptions import DomainError
from rcmlab.lattice import ORIGIN, Site, ball
from rcmlab.operator import (
    Boundary,
    apply,
    assemble,
    component_within,
    expected_exit_time,
    harmonic_extension,
    harmonic_measure,
    killed_green,
    solve_spd,
)


class TestAssemble:
    def test_stiffness_is_symmetric(self, uniform_env):
        gen = assemble(uniform_env, Speed.CSRW, ball(ORIGIN, 5))
        K = gen.stiffness.toarray()
        assert np.allclose(K, K.T)

    def test_generator_rows(self, uniform_env):
        """Rows of the Dirichlet generator sum to minus the rate of leaving the domain."""
        gen = assemble(uniform_env, Speed.VSRW, ball(ORIGIN, 4))
        leaving = np.asarray(gen.coupling.sum(axis=1)).ravel()
        assert np.allclose(gen.matrix().toarray().sum(axis=1), -leaving)

    def test_reflecting_rows_sum_to_zero(self, uniform_env):
        gen = assemble(uniform_env, Speed.VSRW, ball(ORIGIN, 4), boundary=Boundary.REFLECTING)
        assert np.allclose(gen.matrix().toarray().sum(axis=1), 0.0)

    def test_apply_constant_is_zero(self, uniform_env):
        gen = assemble(uniform_env, Speed.CSRW, ball(ORIGIN, 4))
        assert np.allclose(apply(gen, lambda s: 3.0), 0.0)

    def test_apply_matches_definition(self, uniform_env):
        gen = assemble(uniform_env, Speed.VSRW, ball(ORIGIN, 3))
        def f(s):
            return float(s[0] ** 2 - 2 * s[1])

        x = ORIGIN
        expected = sum(
            uniform_env.between(x, y) * (f(y) - f(x))
            for y in [Site(1, 0), Site(-1, 0), Site(0, 1), Site(0, -1)]
        )
        assert apply(gen, f)[gen.index[x]] == pytest.approx(expected)

    def test_window_frame_is_rejected(self, homogeneous_env):
        with pytest.raises(DomainError):
            assemble(homogeneous_env, Speed.VSRW, [Site(12, 0)])

    def test_empty_domain_is_rejected(self, homogeneous_env):
        with pytest.raises(DomainError):
            assemble(homogeneous_env, Speed.VSRW, [])


class TestGreen:
    """Killed Green functions against dense solves."""

    @pytest.mark.parametrize("speed", [Speed.VSRW, Speed.CSRW])
    def test_matches_dense_inverse(self, uniform_env, speed):
        domain = ball(ORIGIN, 4)
        y = Site(1, 2)
        field, _ = killed_green(uniform_env, speed, domain, y)
        gen = assemble(uniform_env, speed, component_within(uniform_env, domain, y))
        dense = np.linalg.inv(gen.stiffness.toarray())[:, gen.index[y]]
        assert np.allclose([field(s) for s in gen.domain], dense, atol=1e-9)

    def test_symmetric(self, uniform_env):
        domain = ball(ORIGIN, 5)
        x, y = Site(2, 1), Site(-1, -2)
        gx, _ = killed_green(uniform_env, Speed.CSRW, domain, x)
        gy, _ = killed_green(uniform_env, Speed.CSRW, domain, y)
        assert gx(y) == pytest.approx(gy(x), rel=1e-8)

    def test_direct_and_cg_agree(self, uniform_env):
        domain = ball(ORIGIN, 6)
        cg_field, _ = killed_green(uniform_env, Speed.VSRW, domain, ORIGIN, method="cg")
        direct_field, _ = killed_green(uniform_env, Speed.VSRW, domain, ORIGIN, method="direct")
        assert np.allclose(cg_field.values, direct_field.values, rtol=1e-8)

    def test_unit_ball_exit_time(self, homogeneous_env):
        # the walk leaves {0} after one holding time
        unit = ball(ORIGIN, 1)
        assert expected_exit_time(homogeneous_env, Speed.VSRW, ORIGIN, unit) == pytest.approx(0.25)
        assert expected_exit_time(homogeneous_env, Speed.CSRW, ORIGIN, unit) == pytest.approx(1.0)

    def test_green_needs_cluster_site(self):
        env = StaticEnvironment.homogeneous(3)
        east = np.array(env.east)
        north = np.array(env.north)
        # isolate (2, 2)
        east[4, 5] = east[5, 5] = north[5, 4] = north[5, 5] = 0.0
        isolated = StaticEnvironment.from_arrays(east, north)
        with pytest.raises(DomainError):
            killed_green(isolated, Speed.VSRW, ball(ORIGIN, 3), (2, 2))


class TestHarmonic:
    def test_harmonic_measure_is_a_distribution(self, uniform_env):
        measure = harmonic_measure(uniform_env, ORIGIN, ball(ORIGIN, 4))
        assert sum(measure.values()) == pytest.approx(1.0)
        assert all(sum(abs(c) for c in z) == 4 for z in measure)

    def test_unit_ball_exit_is_proportional_to_conductance(self, uniform_env):
        measure = harmonic_measure(uniform_env, ORIGIN, ball(ORIGIN, 1))
        mu = uniform_env.mu(ORIGIN)
        assert measure[Site(1, 0)] == pytest.approx(uniform_env.between(ORIGIN, (1, 0)) / mu)

    def test_constant_boundary_values_extend_to_constants(self, uniform_env):
        field, _ = harmonic_extension(uniform_env, Speed.VSRW, ball(ORIGIN, 5), lambda z: 2.0)
        assert np.allclose(field.values, 2.0)

    def test_linear_boundary_values_on_homogeneous(self, homogeneous_env):
        field, _ = harmonic_extension(
            homogeneous_env, Speed.VSRW, ball(ORIGIN, 6), lambda z: float(z[0] + 3 * z[1])
        )
        assert field((2, -1)) == pytest.approx(-1.0)

    def test_solve_spd_zero_rhs(self, homogeneous_env):
        gen = assemble(homogeneous_env, Speed.VSRW, ball(ORIGIN, 3))
        u, report = solve_spd(gen.stiffness, np.zeros(gen.size))
        assert not u.any()
        assert report.iterations == 0
