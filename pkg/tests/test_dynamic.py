from collections import Counter

import numpy as np
import pytest
from scipy import special

from rcmlab.dynamic import (
    DynamicLaw,
    InterfaceDrivenEnvironment,
    InterfaceDriver,
    InterfaceField,
    InterfacePotential,
    PiecewiseEnvironment,
    PotentialKind,
    annealed_density,
    annealed_potential,
    check_dynamic_moment_condition,
    fit_log_slope,
    gaussian_variance_oracle,
    hs_conductances,
    interface_step,
    log_slope_expected,
    quenched_dynamic_density,
    run_interface,
    simulate_inhomogeneous,
    simulate_inhomogeneous_endpoints,
    variance_scaling,
)
from rcmlab.environment import ConductanceLaw, Speed, StaticEnvironment
from rcmlab.exceptions import ConfigurationError, DomainError, EllipticityError
from rcmlab.heatkernel import transition_density
from rcmlab.lattice import ORIGIN, Site
from rcmlab.montecarlo import chi_square_test


@pytest.fixture
def two_frames():
    """Unit and doubled conductances alternating every half time unit."""
    return PiecewiseEnvironment(
        0.5,
        (StaticEnvironment.homogeneous(20, 1.0), StaticEnvironment.homogeneous(20, 2.0)),
        1.0,
        2.0,
    )


class TestPiecewiseEnvironment:
    def test_frames_cycle(self, two_frames):
        assert two_frames.frame_at(0.2) is two_frames.frames[0]
        assert two_frames.frame_at(0.7) is two_frames.frames[1]
        assert two_frames.frame_at(1.2) is two_frames.frames[0]

    def test_frame_above_bound(self):
        with pytest.raises(EllipticityError):
            PiecewiseEnvironment(1.0, (StaticEnvironment.homogeneous(5, 2.0),), 0.5, 1.0)

    def test_degenerate_bounds_need_diagnostic_mode(self):
        with pytest.raises(ConfigurationError):
            PiecewiseEnvironment(1.0, (StaticEnvironment.homogeneous(5),), 0.0, 1.0)

    def test_law_with_closed_edges(self):
        law = ConductanceLaw.constant(1.0, p_open=0.5)
        with pytest.raises(ConfigurationError):
            DynamicLaw(law, 5, num_frames=2).build(1)
        denv = DynamicLaw(law, 5, num_frames=2, diagnostic=True).build(1)
        assert denv.c_lo == 0.0
        assert len(denv.frames) == 2


class TestQuenchedDensity:
    def test_constant_environment_is_static(self):
        denv = PiecewiseEnvironment.constant(StaticEnvironment.homogeneous(20))
        kernel = quenched_dynamic_density(denv, [0.5, 1.0])
        expected = special.ive(1, 2.0) * special.ive(0, 2.0)
        assert kernel.at(1, (1, 0)) == pytest.approx(expected, abs=1e-7)
        assert kernel.mass(1) + kernel.leak(1) == pytest.approx(1.0)

    def test_commuting_frames_average(self, two_frames):
        kernel = quenched_dynamic_density(two_frames, [1.0])
        static = transition_density(
            StaticEnvironment.homogeneous(20, 1.5), Speed.VSRW, ORIGIN, 1.0
        )
        for y in [(0, 0), (1, 0), (2, 1)]:
            assert kernel.at(0, y) == pytest.approx(static(y), abs=1e-6)

    def test_outside_box(self, two_frames):
        kernel = quenched_dynamic_density(two_frames, [0.5], radius=4)
        with pytest.raises(DomainError):
            kernel.at(0, (5, 0))

    def test_box_must_fit(self, two_frames):
        with pytest.raises(ConfigurationError):
            quenched_dynamic_density(two_frames, [1.0], radius=20)


class TestThinning:
    def test_same_seed_same_path(self, two_frames):
        first = simulate_inhomogeneous(two_frames, ORIGIN, 3.0, seed=4)
        second = simulate_inhomogeneous(two_frames, ORIGIN, 3.0, seed=4)
        assert np.array_equal(first.sites, second.sites)

    def test_start_in_frame(self, two_frames):
        with pytest.raises(DomainError):
            simulate_inhomogeneous(two_frames, (20, 0), 1.0, seed=0)

    def test_endpoints_follow_the_kernel(self, two_frames):
        rng = np.random.default_rng(21)
        batch = simulate_inhomogeneous_endpoints(two_frames, [(0, 0)] * 20000, 1.0, rng)
        kernel = quenched_dynamic_density(two_frames, [1.0], radius=12)
        r = kernel.radius
        model = {
            Site(i - r, j - r): float(p)
            for (i, j), p in np.ndenumerate(kernel.densities[0])
            if p > 0
        }
        observed = Counter(Site(int(a), int(b)) for a, b in batch.positions)
        assert batch.leak_fraction == 0.0
        assert chi_square_test(observed, model).passes(0.001)

    def test_occupation_method_agrees(self):
        source = PiecewiseEnvironment.constant(StaticEnvironment.homogeneous(20))
        exact = annealed_density(source, 1.0, ORIGIN)
        sampled = annealed_density(source, 1.0, ORIGIN, method="occupation", num_walks=20000)
        assert abs(exact.value - sampled.value) <= 4 * sampled.std_error


class TestAnnealedPotential:
    def test_truncated_value_brackets_the_limit(self):
        source = PiecewiseEnvironment.constant(StaticEnvironment.homogeneous(30))
        estimate = annealed_potential(source, (1, 0), horizon=5.0)
        assert estimate.value < 0.25 <= estimate.value + estimate.tail

    def test_origin(self, two_frames):
        assert annealed_potential(two_frames, ORIGIN, 1.0).value == 0.0

    def test_horizon_must_be_positive(self, two_frames):
        with pytest.raises(DomainError):
            annealed_potential(two_frames, (1, 0), 0.0)


class TestDynamicMoments:
    def test_bounded_law(self):
        law = ConductanceLaw.uniform(0.5, 1.5)
        assert check_dynamic_moment_condition(law, 4, 4).satisfied
        assert not check_dynamic_moment_condition(law, 2, 2).satisfied

    def test_exponent_range(self):
        with pytest.raises(DomainError):
            check_dynamic_moment_condition(ConductanceLaw.uniform(0.5, 1.5), 1, 4)


class TestInterface:
    """Langevin interface and the conductances it induces."""

    def test_potential_bounds(self):
        cosine = InterfacePotential(PotentialKind.COSINE, 0.5)
        assert cosine.c_minus == 0.5
        assert cosine.c_plus == 1.5
        with pytest.raises(ConfigurationError):
            InterfacePotential(PotentialKind.COSINE, 1.0)

    def test_step_size_limit(self):
        with pytest.raises(ConfigurationError):
            InterfaceField.flat(8, h=0.2)

    def test_steps_are_reproducible(self):
        field = InterfaceField.flat(8, seed=3)
        assert np.array_equal(interface_step(field).psi, interface_step(field).psi)
        assert interface_step(field).step == 1

    def test_quadratic_conductances_are_unit(self):
        field = run_interface(InterfaceField.flat(9, seed=1), 20)
        env = hs_conductances(field)
        assert env.half_width == 4
        assert np.all(env.east[:-1, :] == 1.0)

    def test_cosine_conductances_stay_in_bounds(self):
        potential = InterfacePotential(PotentialKind.COSINE, 0.5)
        field = run_interface(InterfaceField.flat(9, potential, tilt=(0.3, 0.0), seed=2), 50)
        env = hs_conductances(field)
        values = np.concatenate([env.east[:-1, :].ravel(), env.north[:, :-1].ravel()])
        assert values.min() >= 0.5
        assert values.max() <= 1.5

    def test_driven_environment_replays(self):
        potential = InterfacePotential(PotentialKind.COSINE, 0.4)
        driver = InterfaceDriver(9, potential, burn_in=10)
        denv = driver.build(seed=5)
        assert isinstance(denv, InterfaceDrivenEnvironment)
        third = denv.frame(3).east.copy()
        denv.frame(1)
        assert np.array_equal(denv.frame(3).east, third)
        assert np.array_equal(driver.build(seed=5).frame(3).east, third)

    def test_oracle_nearest_neighbour(self):
        side = 12
        assert gaussian_variance_oracle(side, (1, 0)) == pytest.approx(
            (side**2 - 1) / (2 * side**2)
        )
        with pytest.raises(ConfigurationError):
            gaussian_variance_oracle(side, (1, 0), h=0.3)

    def test_quadratic_variance_matches_oracle(self):
        table = variance_scaling(
            InterfacePotential(),
            (0.0, 0.0),
            16,
            [1, 2],
            burn_in=2000,
            samples=200,
            spacing=10,
            seed=6,
            num_batches=20,
        )
        first = table.rows[0]
        assert first.offset == (1, 0)
        assert abs(first.variance - first.oracle) <= 3 * first.std_error
        # the chain at h = 0.05 sits visibly above the continuous-time value
        continuous = gaussian_variance_oracle(16, (1, 0))
        assert first.variance - continuous > 3 * first.std_error
        assert table.rows[1].variance > first.variance

    def test_tilt_fixes_the_mean_gradient(self):
        field = run_interface(InterfaceField.flat(8, tilt=(0.3, -0.2), seed=4), 200)
        east, north = field.gradients()
        assert east.mean() == pytest.approx(0.3, abs=1e-12)
        assert north.mean() == pytest.approx(-0.2, abs=1e-12)

    def test_zero_noise_relaxes_to_the_tilt_plane(self):
        rng = np.random.default_rng(9)
        field = InterfaceField(8, rng.standard_normal((8, 8)), tilt=(0.5, 0.0), noise_scale=0.0)
        mean = field.psi.mean()
        spreads = []
        for _ in range(600):
            spreads.append(np.linalg.norm(field.psi - field.psi.mean()))
            field = interface_step(field)
        assert all(b < a for a, b in zip(spreads, spreads[1:], strict=False))
        assert spreads[-1] < 1e-6 * spreads[0]
        assert field.psi.mean() == pytest.approx(mean, abs=1e-12)

    def test_torus_too_small(self):
        with pytest.raises(ConfigurationError):
            variance_scaling(InterfacePotential(), (0.0, 0.0), 8, [4], 10, 20)

    def test_expected_slope(self):
        assert log_slope_expected(InterfacePotential()) == pytest.approx(1 / np.pi)


class TestFitLogSlope:
    def test_exact_logarithm(self):
        ns = [2, 4, 8, 16]
        slope, error = fit_log_slope(ns, [0.5 * np.log(n) + 1 for n in ns])
        assert slope == pytest.approx(0.5)
        assert error == pytest.approx(0.0, abs=1e-10)

    def test_two_points(self):
        slope, error = fit_log_slope([1, np.e], [0.0, 2.0])
        assert slope == pytest.approx(2.0)
        assert np.isnan(error)

    def test_one_point(self):
        with pytest.raises(ConfigurationError):
            fit_log_slope([4], [1.0])
