"""Tests for the minimization of G and the gamma scans."""

import numpy as np
import pytest

from extremal_sl.config import RunConfig
from extremal_sl.errors import DomainError, ParameterError
from extremal_sl.functional import G
from extremal_sl.grid import THRESHOLD_GAMMA, GammaParam, constant, from_callable, power_integral
from extremal_sl.optimize import (
    OptimReport,
    alternating_minimize,
    el_residual,
    initial_guess,
    minimize_G,
    scan_gamma,
)
from extremal_sl.sturm import lambda_k

SMALL = RunConfig(grid_n=256, max_iters=3000, threads=2)


def fake_report(gamma, m_hat):
    y = constant(1.0, 64)
    return OptimReport(
        gamma=gamma.gamma,
        m_hat=m_hat,
        minimizer=y,
        extremal_potential=y,
        grad_norm=0.0,
        duality_gap=0.0,
        lambda_qstar=m_hat,
        iterations=1,
        converged=True,
    )


class TestMinimizeG:
    """Tests for the projected gradient descent."""

    def test_below_threshold_collapses_to_constant(self):
        report = minimize_G(GammaParam(0.5), SMALL)
        assert 1.0 - 1e-3 <= report.m_hat <= 1.0 + 1e-9
        assert report.gamma == 0.5

    def test_above_threshold_beats_trial_function(self):
        gamma = GammaParam(0.9)
        config = SMALL.replace(grid_n=512)
        report = minimize_G(gamma, config)
        trial = G(from_callable(lambda x: 1.0 + 0.1 * np.cos(np.pi * x), 512), gamma)
        assert report.m_hat <= trial
        assert report.m_hat <= 0.96

    def test_report_invariants(self):
        gamma = GammaParam(0.9)
        report = minimize_G(gamma, SMALL)
        assert report.m_hat <= 1.0 + 1e-9
        assert power_integral(report.extremal_potential, 0.9) == pytest.approx(1.0, abs=1e-8)
        assert report.lambda_qstar <= report.m_hat + 1e-8
        assert report.duality_gap == pytest.approx(abs(report.lambda_qstar - report.m_hat))
        assert report.minimizer.minimum() >= SMALL.zeta * 0.999
        if report.converged:
            assert report.grad_norm <= SMALL.grad_tol

    def test_history_is_nonincreasing(self):
        report = minimize_G(GammaParam(0.9), SMALL)
        history = np.asarray(report.history)
        assert np.all(np.diff(history) <= 0.0)
        assert report.m_hat == history[-1]

    def test_budget_exhaustion_is_reported(self):
        report = minimize_G(GammaParam(0.9), SMALL.replace(max_iters=1))
        assert report.converged is False
        assert report.iterations == 1
        assert report.message

    def test_constant_fallback_reports_its_own_gradient(self):
        # one step from a large bump cannot reach G = 1 below the threshold
        initial = from_callable(lambda x: 1.0 + 0.5 * np.cos(np.pi * x), 256)
        report = minimize_G(GammaParam(0.5), SMALL.replace(max_iters=1), initial=initial)
        assert "constant trial function kept" in report.message
        np.testing.assert_array_equal(report.minimizer.values, 1.0)
        assert report.grad_norm <= SMALL.grad_tol
        assert report.converged is True
        assert report.m_hat == report.history[-1]


    def test_threshold_case_stays_at_one(self):
        report = minimize_G(GammaParam(THRESHOLD_GAMMA), SMALL.replace(max_iters=500))
        assert abs(report.m_hat - 1.0) <= 2e-3

    def test_nonpositive_initial_rejected(self):
        initial = from_callable(lambda x: x - 0.5, 256)
        with pytest.raises(DomainError):
            minimize_G(GammaParam(0.9), SMALL, initial=initial)

    def test_custom_initial_grid_wins(self):
        report = minimize_G(GammaParam(0.5), SMALL, initial=initial_guess(128, 0.2))
        assert report.minimizer.n == 128

    def test_serialization(self):
        report = minimize_G(GammaParam(0.5), SMALL.replace(max_iters=5))
        row = report.to_row()
        assert list(row) == ["gamma", "m_hat", "grad_norm", "duality_gap", "converged"]
        payload = report.to_dict()
        assert len(payload["minimizer"]) == 257
        assert len(payload["extremal_potential"]) == 257

    @pytest.mark.slow
    def test_restart_stability(self):
        gamma = GammaParam(0.9)
        config = RunConfig(grid_n=1024, threads=1)
        a = minimize_G(gamma, config, initial=initial_guess(1024, 0.05))
        b = minimize_G(gamma, config, initial=from_callable(lambda x: 1.0 + 0.2 * np.cos(np.pi * x) + 0.05 * x, 1024))
        assert abs(a.m_hat - b.m_hat) <= 1e-3

    @pytest.mark.slow
    def test_minimizer_solves_euler_lagrange(self):
        gamma = GammaParam(0.9)
        report = minimize_G(gamma, RunConfig(grid_n=1024, threads=1))
        assert el_residual(report.minimizer, report.m_hat, gamma) <= 1e-3


class TestAlternating:
    """Tests for the alternating potential/eigenfunction scheme."""

    def test_eigenvalues_never_increase(self):
        report = alternating_minimize(GammaParam(0.9), SMALL, iterations=15)
        values = np.asarray(report.eigenvalues)
        assert np.all(np.diff(values) <= 1e-10)
        assert report.m_hat == values[-1]
        assert report.minimizer.minimum() > 0

    def test_below_threshold(self):
        report = alternating_minimize(GammaParam(0.5), SMALL, iterations=10)
        assert report.m_hat == pytest.approx(1.0, abs=1e-3)

    def test_agrees_with_its_own_potential(self):
        gamma = GammaParam(0.9)
        report = alternating_minimize(gamma, SMALL, iterations=5)
        assert power_integral(report.extremal_potential, 0.9) == pytest.approx(1.0, abs=1e-10)
        assert lambda_k(report.extremal_potential, 1).eigenvalue == pytest.approx(report.m_hat, rel=1e-12)

    def test_rejects_zero_iterations(self):
        with pytest.raises(ParameterError):
            alternating_minimize(GammaParam(0.5), SMALL, iterations=0)


class TestScan:
    """Tests for scan_gamma."""

    def test_single_gamma(self):
        table = scan_gamma([0.5], SMALL)
        assert len(table.reports) == 1
        assert table.monotone
        assert table.violations == ()

    def test_rows_follow_input_order(self):
        table = scan_gamma([0.5, 0.6, 0.9], SMALL.replace(max_iters=50))
        assert [r.gamma for r in table.reports] == [0.5, 0.6, 0.9]

    @pytest.mark.parametrize("gammas", [[], [0.7, 0.5], [0.5, 0.5], [0.5, 1.2]])
    def test_rejects_bad_gamma_lists(self, gammas):
        with pytest.raises(ParameterError):
            scan_gamma(gammas, SMALL)

    def test_flags_increase_beyond_slack(self, mocker):
        values = {0.6: 0.99, 0.7: 0.995, 0.8: 0.9952, 0.9: 0.95}
        mocker.patch(
            "extremal_sl.optimize.minimize_G",
            side_effect=lambda gamma, config: fake_report(gamma, values[gamma.gamma]),
        )
        table = scan_gamma(sorted(values), SMALL)
        assert table.violations == (0,)
        assert not table.monotone

    @pytest.mark.slow
    def test_threshold_theorem(self):
        config = RunConfig(grid_n=1024)
        below = scan_gamma([0.5, 0.7, 0.79], config)
        assert all(1.0 - 1e-3 <= r.m_hat <= 1.0 + 1e-9 for r in below.reports)
        above = scan_gamma([0.85, 0.9, 0.95], config)
        assert all(r.m_hat < 1.0 - 1e-2 for r in above.reports)
        assert above.monotone


class TestElResidual:
    """Tests for the Euler-Lagrange residual."""

    def test_constant_solves_with_unit_mu(self):
        assert el_residual(constant(1.0, 256), 1.0, GammaParam(0.9)) == pytest.approx(0.0, abs=1e-12)

    def test_scale_invariant(self):
        assert el_residual(constant(7.0, 256), 1.0, GammaParam(0.9)) == pytest.approx(0.0, abs=1e-12)

    def test_rejects_non_solution(self):
        y = from_callable(lambda x: 1.0 + 0.3 * np.cos(np.pi * x), 1024)
        assert el_residual(y, 1.0, GammaParam(0.9)) >= 0.1

    def test_requires_positive_function(self):
        with pytest.raises(DomainError):
            el_residual(from_callable(lambda x: x, 64), 1.0, GammaParam(0.9))
