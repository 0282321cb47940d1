"""Tests for the Neumann eigensolver."""

import math

import numpy as np
import pytest

from extremal_sl.errors import ConvergenceError, DomainError, ParameterError
from extremal_sl.grid import GammaParam, build, constant, from_callable, inner, power_integral, step
from extremal_sl.sturm import (
    lambda_k,
    lambda_k_richardson,
    normalize_to_A_gamma,
    rayleigh_quotient,
    rescale_between_classes,
    spectrum,
)


def smooth_potential(n):
    return from_callable(lambda x: 2.0 + np.cos(np.pi * x) + x * x, n)


class TestLambdaK:
    """Tests for lambda_k on potentials with known spectra."""

    def test_zero_potential_ground_state(self):
        res = lambda_k(constant(0.0, 1024), 1)
        assert abs(res.eigenvalue) <= 1e-9
        np.testing.assert_allclose(res.eigenfunction.values, 1.0, atol=1e-8)

    def test_zero_potential_second_eigenvalue(self):
        lam = lambda_k_richardson(constant(0.0, 4096), 2)
        assert abs(lam - math.pi ** 2) <= 1e-6

    def test_unit_potential(self):
        res = lambda_k(constant(1.0, 4096), 1)
        assert abs(res.lam - 1.0) <= 1e-8

    def test_result_fields(self):
        res = lambda_k(smooth_potential(256), 2, tol_alg=1e-10)
        assert res.k == 2
        assert 0.0 <= res.residual <= 1e-10
        assert res.eigenfunction.values[0] > 0
        assert inner(res.eigenfunction, res.eigenfunction) == pytest.approx(1.0, rel=1e-12)
        assert res.to_dict()["lambda"] == res.eigenvalue

    def test_ground_state_is_positive(self):
        q = step(0.3, 0.6, 500.0, 600)
        res = lambda_k(q, 1)
        assert res.eigenfunction.minimum() > 0

    def test_step_potential_against_fine_grid(self):
        coarse = lambda_k(step(0.0, 0.1, 100.0, 4000), 1).eigenvalue
        fine = lambda_k(step(0.0, 0.1, 100.0, 32000), 1).eigenvalue
        assert abs(coarse - fine) <= 1e-4 * fine

    def test_eigenvalue_is_rayleigh_quotient(self):
        q = smooth_potential(512)
        res = lambda_k(q, 1)
        assert rayleigh_quotient(q, res.eigenfunction) == pytest.approx(res.eigenvalue, rel=1e-14)

    def test_rejects_negative_potential(self):
        with pytest.raises(DomainError):
            lambda_k(constant(-1.0, 64), 1)

    @pytest.mark.parametrize("k", [0, 64])
    def test_rejects_bad_index(self, k):
        with pytest.raises(ParameterError):
            lambda_k(constant(0.0, 64), k)

    def test_unreachable_tolerance_raises(self):
        with pytest.raises(ConvergenceError):
            lambda_k(smooth_potential(256), 1, tol_alg=1e-30)


class TestSpectralProperties:
    """Structural properties of the discrete spectrum."""

    @pytest.mark.parametrize("c", [0.5, 3.0, 40.0])
    def test_shift_covariance(self, c):
        q = smooth_potential(1024)
        base = lambda_k(q, 1).eigenvalue
        shifted = lambda_k(q.with_values(q.values + c), 1).eigenvalue
        assert abs(shifted - (base + c)) <= 1e-9

    def test_eigenfunctions_orthogonal(self):
        q = smooth_potential(1024)
        y1 = lambda_k(q, 1).eigenfunction
        y2 = lambda_k(q, 2).eigenfunction
        assert abs(inner(y1, y2)) <= 1e-8

    def test_strictly_increasing_in_k(self):
        q = smooth_potential(512)
        values = [lambda_k(q, k).eigenvalue for k in range(1, 6)]
        assert all(b > a for a, b in zip(values, values[1:]))
        np.testing.assert_allclose(spectrum(q, 5), values, rtol=1e-9)

    def test_form_monotonicity(self):
        rng = np.random.default_rng(7)
        q1 = from_callable(lambda x: 1.0 + np.sin(3 * x) ** 2, 512)
        q2 = q1.with_values(q1.values + rng.uniform(0.0, 2.0, q1.values.size))
        assert lambda_k(q1, 1).eigenvalue <= lambda_k(q2, 1).eigenvalue + 1e-9

    def test_second_order_convergence(self):
        lams = [lambda_k(smooth_potential(n), 1).eigenvalue for n in (128, 256, 512)]
        ratio = (lams[0] - lams[1]) / (lams[1] - lams[2])
        assert 3.5 < ratio < 4.5


class TestNormalization:
    """Tests for the A_gamma normalization."""

    @pytest.mark.parametrize("gamma", [0.3, 0.5, 0.9])
    def test_constant_maps_to_one(self, gamma):
        q = normalize_to_A_gamma(constant(5.0, 128), GammaParam(gamma))
        np.testing.assert_allclose(q.values, 1.0, rtol=1e-12)

    def test_idempotent(self):
        g = GammaParam(0.7)
        q = normalize_to_A_gamma(smooth_potential(256), g)
        again = normalize_to_A_gamma(q, g)
        np.testing.assert_allclose(again.values, q.values, rtol=1e-12)
        assert power_integral(q, 0.7) == pytest.approx(1.0, abs=1e-12)

    def test_identity_at_one_half(self):
        x = from_callable(lambda x: x, 8192)
        q = normalize_to_A_gamma(x, GammaParam(0.5))
        assert q.values[-1] == pytest.approx(2.25, rel=1e-5)

    def test_zero_potential_rejected(self):
        with pytest.raises(DomainError):
            normalize_to_A_gamma(constant(0.0, 64), GammaParam(0.5))

    def test_rescale_between_classes_shrinks(self):
        g, g1 = GammaParam(0.6), GammaParam(0.8)
        q = normalize_to_A_gamma(smooth_potential(256), g)
        q1 = rescale_between_classes(q, g, g1)
        ratio = q1.values / q.values
        assert np.allclose(ratio, ratio[0])
        assert ratio[0] <= 1.0
        assert power_integral(q1, 0.8) == pytest.approx(1.0, abs=1e-12)

    def test_rescale_requires_larger_exponent(self):
        with pytest.raises(ParameterError):
            rescale_between_classes(constant(1.0, 64), GammaParam(0.8), GammaParam(0.6))

    def test_rescale_requires_membership(self):
        with pytest.raises(DomainError):
            rescale_between_classes(smooth_potential(256), GammaParam(0.6), GammaParam(0.8))

    @pytest.mark.parametrize("seed", range(3))
    def test_rescale_lowers_lambda_1(self, seed):
        rng = np.random.default_rng(seed)
        g, g1 = GammaParam(0.6), GammaParam(0.9)
        q = normalize_to_A_gamma(build(rng.uniform(0.1, 5.0, size=257)), g)
        q1 = rescale_between_classes(q, g, g1)
        assert np.all(q1.values <= q.values * (1.0 + 1e-12))
        assert lambda_k(q1).eigenvalue <= lambda_k(q).eigenvalue + 1e-12

