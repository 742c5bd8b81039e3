"""Moment-term checks: closed-form reductions, the quadrature oracle, and
the monotonicity structure the ledger relies on."""

import math

import numpy as np
import pytest

from bayesdp.exceptions import ConfigurationError, DivergenceUndefinedError, DomainError
from bayesdp.mechanisms import (
    MechanismConfig,
    log_moment_subsampled,
    log_moment_subsampled_batch,
    ma_privacy_cost,
    renyi_gaussian_diag,
    renyi_gaussian_shared_var,
)
from bayesdp.numerics import gauss_mixture_renyi_numeric


class TestMechanismConfig:
    def test_noise_std_with_clip(self):
        cfg = MechanismConfig(sigma=2.0, q=0.1, clip=0.5, noise_multiplier_factor=2.0)
        assert cfg.noise_std == pytest.approx(2.0)

    def test_noise_std_unclipped_is_absolute(self):
        assert MechanismConfig(sigma=0.7, q=0.1).noise_std == 0.7

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"sigma": 0.0, "q": 0.1},
            {"sigma": 1.0, "q": -0.1},
            {"sigma": 1.0, "q": 1.1},
            {"sigma": 1.0, "q": 0.1, "clip": 0.0},
            {"sigma": 1.0, "q": 0.1, "noise_multiplier_factor": 0.0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            MechanismConfig(**kwargs)


class TestSharedVarianceGaussian:
    def test_zero_distance(self):
        assert renyi_gaussian_shared_var(0.0, 1.0, 5.0) == 0.0

    def test_formula(self):
        assert renyi_gaussian_shared_var(1.0, 1.0, 3.0) == pytest.approx(1.5)

    def test_matches_quadrature_at_q_one(self):
        got = renyi_gaussian_shared_var(2.0, 1.0, 2.0)
        assert got == pytest.approx(4.0)
        assert got == pytest.approx(gauss_mixture_renyi_numeric(2.0, 1.0, 1.0, 2.0), rel=1e-8)

    def test_domain(self):
        with pytest.raises(DomainError):
            renyi_gaussian_shared_var(1.0, -1.0, 2.0)
        with pytest.raises(DomainError):
            renyi_gaussian_shared_var(1.0, 1.0, 1.0)


def _diag_quadrature_1d(mean_a, var_a, mean_b, var_b, order):
    """Independent in-test oracle for differing-variance 1-d Gaussians.

    The integrand p^order q^(1-order) is itself a Gaussian whose precision
    shrinks toward the validity boundary, pushing its peak far from both
    means; locate it first so the window always covers it."""
    precision = order / var_a + (1.0 - order) / var_b
    peak = (order * mean_a / var_a + (1.0 - order) * mean_b / var_b) / precision
    width = 20.0 / math.sqrt(precision)
    xs = np.linspace(peak - width, peak + width, 2_000_001)

    def log_pdf(x, mu, var):
        return -0.5 * math.log(2.0 * math.pi * var) - (x - mu) ** 2 / (2.0 * var)

    log_f = order * log_pdf(xs, mean_a, var_a) + (1.0 - order) * log_pdf(xs, mean_b, var_b)
    top = log_f.max()
    integral = np.trapezoid(np.exp(log_f - top), xs)
    return (top + math.log(integral)) / (order - 1.0)


class TestDiagGaussian:
    def test_identical_parameters(self):
        assert renyi_gaussian_diag([1.0, 2.0], [0.5, 2.0], [1.0, 2.0], [0.5, 2.0], 3.0) == 0.0

    def test_reduces_to_shared_variance(self):
        mean_a = np.array([0.3, -1.0, 2.0])
        mean_b = np.array([0.0, 0.5, 1.0])
        var = np.full(3, 1.7)
        d = float(np.linalg.norm(mean_a - mean_b))
        got = renyi_gaussian_diag(mean_a, var, mean_b, var, 4.0)
        assert got == pytest.approx(renyi_gaussian_shared_var(d, math.sqrt(1.7), 4.0), rel=1e-12)

    def test_differing_variances_vs_quadrature(self):
        got = renyi_gaussian_diag([0.0], [1.0], [0.0], [2.0], 2.0)
        assert got == pytest.approx(_diag_quadrature_1d(0.0, 1.0, 0.0, 2.0, 2.0), abs=1e-8)
        # and against the hand-derived closed value log(2/sqrt(3))
        assert got == pytest.approx(math.log(2.0 / math.sqrt(3.0)), rel=1e-12)
        got = renyi_gaussian_diag([0.5], [1.3], [-0.2], [0.9], 3.0)
        assert got == pytest.approx(_diag_quadrature_1d(0.5, 1.3, -0.2, 0.9, 3.0), abs=1e-8)

    def test_order_monotonicity_grid(self):
        values = [
            renyi_gaussian_diag([0.4, -0.1], [1.0, 1.5], [0.0, 0.2], [1.2, 1.4], order)
            for order in (1.5, 2.0, 3.0, 5.0, 8.0)
        ]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_undefined_outside_validity_range(self):
        # (1 - order) * var_a + order * var_b hits zero
        with pytest.raises(DivergenceUndefinedError):
            renyi_gaussian_diag([0.0], [2.0], [0.0], [1.0], 2.0)

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            renyi_gaussian_diag([0.0, 1.0], [1.0, 1.0], [0.0], [1.0], 2.0)


class TestLogMomentSubsampled:
    def test_zero_distance(self):
        dm = log_moment_subsampled(0.0, MechanismConfig(sigma=1.0, q=0.3), 5)
        assert dm.left == 0.0 and dm.right == 0.0

    def test_degenerate_binomial_q_one(self):
        dm = log_moment_subsampled(1.0, MechanismConfig(sigma=1.0, q=1.0), 1)
        assert dm.left == pytest.approx(1.0, abs=1e-14)
        assert dm.right == pytest.approx(1.0, abs=1e-14)

    def test_unit_integrand_at_zero_exponent(self):
        dm = log_moment_subsampled(0.0, MechanismConfig(sigma=1.0, q=0.5), 1)
        assert dm.left == 0.0

    def test_q_one_reduction_exact(self):
        # both directions coincide at lam*(lam+1)*d^2/(2 sigma^2)
        for lam in (1, 2, 7, 32):
            for d, sigma in ((1.0, 1.0), (0.5, 2.0)):
                cfg = MechanismConfig(sigma=sigma, q=1.0)
                dm = log_moment_subsampled(d, cfg, lam)
                expected = lam * (lam + 1) * d * d / (2.0 * sigma * sigma)
                assert dm.left == expected
                assert dm.right == expected

    def test_forward_direction_is_exact_oracle(self):
        for lam in (1, 3, 5):
            for q in (0.01, 0.1):
                for z in (0.1, 1.0, 2.0):
                    cfg = MechanismConfig(sigma=1.0, q=q)
                    dm = log_moment_subsampled(z, cfg, lam)
                    fwd = gauss_mixture_renyi_numeric(z, 1.0, q, lam + 1)
                    assert dm.left == pytest.approx(lam * fwd, rel=1e-6)
                    rev = gauss_mixture_renyi_numeric(z, 1.0, q, lam + 1, reverse=True)
                    assert dm.right >= lam * rev - 1e-9

    def test_worst_side_positive_only_when_informative(self):
        assert log_moment_subsampled(1.0, MechanismConfig(sigma=1.0, q=0.0), 4).worst == 0.0
        assert log_moment_subsampled(0.5, MechanismConfig(sigma=1.0, q=0.2), 4).worst > 0.0

    def test_monotonicity_grid(self):
        cfg = MechanismConfig(sigma=1.0, q=0.05)
        in_d = [log_moment_subsampled(d, cfg, 4).worst for d in (0.1, 0.5, 1.0, 2.0)]
        assert all(b > a for a, b in zip(in_d, in_d[1:]))
        in_lam = [log_moment_subsampled(1.0, cfg, lam).worst for lam in (1, 2, 4, 8, 16)]
        assert all(b > a for a, b in zip(in_lam, in_lam[1:]))
        in_q = [
            log_moment_subsampled(1.0, MechanismConfig(sigma=1.0, q=q), 4).worst
            for q in (0.0, 0.01, 0.1, 0.5, 1.0)
        ]
        assert all(b > a for a, b in zip(in_q, in_q[1:]))
        in_sigma = [
            log_moment_subsampled(1.0, MechanismConfig(sigma=s, q=0.05), 4).worst
            for s in (0.5, 1.0, 2.0, 4.0)
        ]
        assert all(b < a for a, b in zip(in_sigma, in_sigma[1:]))

    def test_no_overflow_at_extreme_exponents(self):
        # (k^2 + k) d^2 / (2 sigma^2) far beyond exp range stays in log space
        cfg = MechanismConfig(sigma=0.05, q=0.1)
        dm = log_moment_subsampled(20.0, cfg, 512)
        assert math.isfinite(dm.left) and math.isfinite(dm.right)
        assert dm.worst > 1e5

    def test_batch_matches_scalar(self):
        cfg = MechanismConfig(sigma=1.0, q=0.02)
        distances = np.array([0.0, 0.3, 0.3, 1.7])
        left, right = log_moment_subsampled_batch(distances, cfg, 6)
        for i, d in enumerate(distances):
            dm = log_moment_subsampled(float(d), cfg, 6)
            assert left[i] == dm.left and right[i] == dm.right

    def test_lambda_validated(self):
        with pytest.raises(DomainError):
            log_moment_subsampled(1.0, MechanismConfig(sigma=1.0, q=0.5), 0)
        with pytest.raises(DomainError):
            log_moment_subsampled(-1.0, MechanismConfig(sigma=1.0, q=0.5), 1)


class TestWorstCaseCost:
    def test_requires_clip(self):
        with pytest.raises(ConfigurationError):
            ma_privacy_cost(MechanismConfig(sigma=1.0, q=0.1), 2)

    def test_q_one_closed_form(self):
        cfg = MechanismConfig(sigma=1.0, q=1.0, clip=1.0)
        assert ma_privacy_cost(cfg, 2) == pytest.approx(3.0, abs=1e-14)

    def test_vanishes_with_infinite_noise(self):
        costs = [
            ma_privacy_cost(MechanismConfig(sigma=s, q=0.1, clip=1.0), 4)
            for s in (1.0, 10.0, 100.0, 1000.0)
        ]
        assert all(b < a for a, b in zip(costs, costs[1:]))
        assert costs[-1] < 1e-4

    def test_nondecreasing_in_q(self):
        costs = [
            ma_privacy_cost(MechanismConfig(sigma=1.0, q=q, clip=1.0), 4)
            for q in (0.001, 0.01, 0.1, 0.5, 1.0)
        ]
        assert all(b > a for a, b in zip(costs, costs[1:]))
