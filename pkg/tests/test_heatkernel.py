"""Tests for heat-kernel propagation by uniformization."""

import numpy as np
import pytest
from scipy import linalg, special

from rcmlab.environment import Speed, StaticEnvironment
from rcmlab.exceptions import ConfigurationError, DomainError
from rcmlab.heatkernel import (
    auto_radius,
    gaussian_diagnostic,
    gaussian_onset,
    geometric_grid,
    llt_curve,
    propagate,
    transition_density,
)
from rcmlab.lattice import ORIGIN, Site, ball
from rcmlab.operator import assemble


def bessel_density(t: float, x) -> float:
    """p_t(0, x) = exp(-4t) I_x1(2t) I_x2(2t) for unit conductances."""
    return float(special.ive(abs(x[0]), 2 * t) * special.ive(abs(x[1]), 2 * t))


@pytest.fixture
def wide_env():
    return StaticEnvironment.homogeneous(20)


class TestGrid:
    def test_geometric_grid(self):
        assert geometric_grid(1.0, 10.0, 2.0) == [1.0, 2.0, 4.0, 8.0]

    def test_invalid_grid(self):
        with pytest.raises(ConfigurationError):
            geometric_grid(0.0, 10.0)

    def test_auto_radius_grows_with_time(self):
        assert auto_radius(4.0, 10.0) > auto_radius(4.0, 1.0)


class TestTransitionDensity:
    """Densities of the unit-conductance walk against the Bessel formula."""

    @pytest.mark.parametrize("x", [(0, 0), (1, 0), (2, -1), (3, 3)])
    def test_matches_bessel(self, wide_env, x):
        density = transition_density(wide_env, Speed.VSRW, ORIGIN, 1.0)
        assert density(x) == pytest.approx(bessel_density(1.0, x), abs=1e-6)

    def test_mass_is_conserved(self, wide_env):
        density = transition_density(wide_env, Speed.VSRW, ORIGIN, 1.0)
        assert density.mass() + density.leak == pytest.approx(1.0, abs=1e-9)
        assert density.leak < 1e-5

    def test_box_must_fit(self, homogeneous_env):
        with pytest.raises(ConfigurationError):
            transition_density(homogeneous_env, Speed.VSRW, ORIGIN, 10.0)

    def test_negative_time(self, wide_env):
        with pytest.raises(DomainError):
            transition_density(wide_env, Speed.VSRW, ORIGIN, -1.0)

    def test_csrw_is_a_time_change(self, wide_env):
        # on unit conductances mu = 4, so the CSRW runs four times slower
        vsrw = transition_density(wide_env, Speed.VSRW, ORIGIN, 0.5)
        csrw = transition_density(wide_env, Speed.CSRW, ORIGIN, 2.0)
        assert csrw((1, 1)) * 4 == pytest.approx(vsrw((1, 1)), abs=1e-8)


class TestPropagate:
    def test_matches_matrix_exponential(self, uniform_env):
        gen = assemble(uniform_env, Speed.VSRW, ball(ORIGIN, 4))
        run = propagate(gen, ORIGIN, [0.5, 1.5], tol=1e-13)
        Q = gen.matrix().toarray()
        start = np.zeros(gen.size)
        start[gen.index[ORIGIN]] = 1.0
        for k, t in enumerate([0.5, 1.5]):
            assert np.allclose(run.states[k], start @ linalg.expm(t * Q), atol=1e-10)

    def test_integrals_add_up(self, uniform_env):
        gen = assemble(uniform_env, Speed.VSRW, ball(ORIGIN, 4))
        split = propagate(gen, ORIGIN, [1.0, 2.0], tol=1e-13)
        whole = propagate(gen, ORIGIN, [2.0], tol=1e-13)
        total = split.integrated_density_at(0, ORIGIN) + split.integrated_density_at(1, ORIGIN)
        assert total == pytest.approx(whole.integrated_density_at(0, ORIGIN), rel=1e-9)

    def test_times_must_increase(self, uniform_env):
        gen = assemble(uniform_env, Speed.VSRW, ball(ORIGIN, 3))
        with pytest.raises(DomainError):
            propagate(gen, ORIGIN, [2.0, 1.0])

    def test_base_must_be_in_domain(self, uniform_env):
        gen = assemble(uniform_env, Speed.VSRW, ball(ORIGIN, 3))
        with pytest.raises(DomainError):
            propagate(gen, Site(5, 5), [1.0])


class TestLocalLimit:
    def test_llt_curve_on_unit_conductances(self, wide_env):
        curve = llt_curve(wide_env, Speed.VSRW, [0.5, 1.0, 2.0])
        for t, value in curve:
            assert value == pytest.approx(t * bessel_density(t, ORIGIN), abs=1e-6)

    def test_gaussian_diagnostic_constants(self, wide_env):
        report = gaussian_diagnostic(wide_env, Speed.VSRW, 4.0, radius=15)
        assert len(report.fitted_C) == len(report.trial_c)
        # larger c weights the tail more, so the fitted constant cannot shrink
        assert list(report.fitted_C) == sorted(report.fitted_C)

    def test_gaussian_onset(self, wide_env):
        # t p_t(0, 0) is about 0.095, 0.086 and 0.082 at t = 1, 2 and 4
        grid = [1.0, 2.0, 4.0]
        assert gaussian_onset(wide_env, Speed.VSRW, grid, c=0.05, C=0.1) == 1.0
        assert gaussian_onset(wide_env, Speed.VSRW, grid, c=0.05, C=0.09) == 2.0
        assert gaussian_onset(wide_env, Speed.VSRW, grid, c=0.05, C=0.05) is None
