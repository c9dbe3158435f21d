import math

import pytest

from rcmlab.environment import Speed, StaticEnvironment
from rcmlab.exceptions import DomainError
from rcmlab.lattice import ORIGIN, ball
from rcmlab.potential import (
    CLASSICAL_CONSTANT,
    HOMOGENEOUS_GBAR,
    PotentialMethod,
    bessel_potential_kernel,
    check_corollary23,
    check_lemma22_identity,
    f_term_estimate,
    potential_column,
    potential_green_difference,
    potential_time_integral,
    richardson_extrapolate,
)


class TestBesselKernel:
    """Closed-form values of the homogeneous potential kernel."""

    @pytest.mark.parametrize(
        "x, expected",
        [
            ((1, 0), 0.25),
            ((0, -1), 0.25),
            ((1, 1), 1 / math.pi),
            ((2, 0), 1 - 2 / math.pi),
        ],
    )
    def test_exact_values(self, x, expected):
        assert bessel_potential_kernel(x) == pytest.approx(expected, abs=1e-6)

    def test_vanishes_at_origin(self):
        assert bessel_potential_kernel((0, 0)) == 0.0

    def test_constants(self):
        assert HOMOGENEOUS_GBAR == pytest.approx(0.1591549, abs=1e-7)
        assert CLASSICAL_CONSTANT == pytest.approx(0.2573434, abs=1e-6)


class TestRichardson:
    def test_first_order_sequence(self):
        cutoffs = [8, 16, 32]
        value, order, correction = richardson_extrapolate(cutoffs, [1 + 1 / n for n in cutoffs])
        assert value == pytest.approx(1.0, abs=1e-12)
        assert order == pytest.approx(1.0)
        assert correction == pytest.approx(1 / 32)

    def test_two_values_assume_order_one(self):
        value, order, _ = richardson_extrapolate([10, 20], [1.5, 1.25])
        assert order == 1.0
        assert value == pytest.approx(1.0)

    def test_single_value(self):
        value, _, correction = richardson_extrapolate([10], [0.3])
        assert value == 0.3
        assert math.isnan(correction)


class TestGreenDifference:
    def test_nearest_neighbour_is_a_quarter(self, homogeneous_env):
        # g_B(0,0) - g_B(e1,0) = 1/4 on any ball symmetric under rotation
        estimate = potential_green_difference(
            homogeneous_env, Speed.VSRW, (1, 0), n=8, method="direct"
        )
        assert estimate.method == PotentialMethod.GREEN_DIFFERENCE
        assert estimate.value == pytest.approx(0.25, abs=1e-10)
        assert estimate.error == pytest.approx(0.0, abs=1e-10)

    def test_approaches_bessel_value(self, homogeneous_env):
        estimate = potential_green_difference(
            homogeneous_env, Speed.VSRW, (2, 1), n=11, method="direct"
        )
        assert estimate.value == pytest.approx(bessel_potential_kernel((2, 1)), abs=0.03)

    def test_origin_pair(self, homogeneous_env):
        assert potential_green_difference(homogeneous_env, Speed.VSRW, ORIGIN).value == 0.0

    def test_ball_must_fit(self, homogeneous_env):
        with pytest.raises(DomainError):
            potential_green_difference(homogeneous_env, Speed.VSRW, (1, 0), n=12)

    def test_column_matches_pointwise_difference(self, uniform_env):
        column, _ = potential_column(uniform_env, Speed.VSRW, (1, 1), 6, method="direct")
        pointwise = potential_green_difference(
            uniform_env, Speed.VSRW, (2, 0), (1, 1), n=6, method="direct"
        )
        assert column((2, 0)) == pytest.approx(pointwise.value, abs=1e-10)


class TestTimeIntegral:
    def test_truncated_integral_stays_below_limit(self):
        env = StaticEnvironment.homogeneous(48)
        estimate = potential_time_integral(
            env, Speed.VSRW, (1, 0), horizon=20.0, leak_budget=1e-4
        )
        assert estimate.method == PotentialMethod.TIME_INTEGRAL
        # the integrand is positive, and the part beyond T = 20 is about 1e-3
        assert estimate.value < 0.25
        assert estimate.value == pytest.approx(0.25, abs=3e-3)
        assert estimate.diagnostics["min_integrand"] >= 0


class TestIdentities:
    def test_lemma_identity_is_exact_at_the_cutoff(self, uniform_env):
        report = check_lemma22_identity(
            uniform_env,
            Speed.VSRW,
            ball(ORIGIN, 3),
            (1, 0),
            (2, 0),
            n_ref=8,
            method="direct",
        )
        assert report.cutoff_residual < 1e-8
        assert report.green > 0

    def test_corollary_residual_shrinks(self):
        env = StaticEnvironment.homogeneous(20)
        coarse = check_corollary23(env, Speed.VSRW, (2, 0), (0, 2), 8, method="direct")
        fine = check_corollary23(env, Speed.VSRW, (2, 0), (0, 2), 16, method="direct")
        assert fine.residual < coarse.residual
        assert coarse.green_at_origin == 0.0
        assert fine.limit_table

    def test_corollary_rejects_origin(self, homogeneous_env):
        with pytest.raises(DomainError):
            check_corollary23(homogeneous_env, Speed.VSRW, ORIGIN, (1, 0), 8)


class TestFTerm:
    def test_values_climb_towards_the_potential(self, homogeneous_env):
        points = f_term_estimate(
            homogeneous_env, (1, 0), [4, 8, 11], HOMOGENEOUS_GBAR, method="direct"
        )
        values = [p.value for p in points]
        probabilities = [p.probability for p in points]
        assert values == sorted(values)
        assert all(v < 0.25 for v in values)
        assert probabilities == sorted(probabilities, reverse=True)

    def test_origin_rejected(self, homogeneous_env):
        with pytest.raises(DomainError):
            f_term_estimate(homogeneous_env, ORIGIN, [4], HOMOGENEOUS_GBAR)

    def test_values_scale_with_gbar(self, homogeneous_env):
        base = f_term_estimate(homogeneous_env, (1, 0), [6], HOMOGENEOUS_GBAR, method="direct")
        doubled = f_term_estimate(
            homogeneous_env, (1, 0), [6], 2 * HOMOGENEOUS_GBAR, method="direct"
        )
        assert doubled[0].value == pytest.approx(2 * base[0].value)
        assert doubled[0].probability == base[0].probability

    def test_gbar_must_be_positive(self, homogeneous_env):
        with pytest.raises(DomainError):
            f_term_estimate(homogeneous_env, (1, 0), [4], 0.0)
