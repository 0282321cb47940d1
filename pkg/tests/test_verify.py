"""Tests for the acceptance suite."""

import numpy as np
import pytest

from extremal_sl.config import RunConfig
from extremal_sl.errors import ConvergenceError
from extremal_sl.grid import GammaParam, constant, power_integral
from extremal_sl.verify import (
    SEED,
    AcceptanceSuite,
    CheckResult,
    positive_samples,
    random_positive,
    random_potential,
)

SMALL = RunConfig(grid_n=256, threads=2)


class TestCheckResult:
    """Tests for the PASS/FAIL line."""

    def test_pass_line(self):
        assert CheckResult("gradient", True, "ok").line() == "PASS  gradient: ok"

    def test_fail_line(self):
        assert CheckResult("duality", False, "gap=1").line().startswith("FAIL  duality")


class TestRandomInputs:
    """Tests for the random test functions."""

    def test_positive_samples_count_and_sign(self):
        samples = positive_samples(np.random.default_rng(SEED), 128, 200, modes=6, amplitude=0.9)
        assert len(samples) == 200
        assert all(y.minimum() > 0 for y in samples)

    def test_positive_samples_gives_up(self, mocker):
        mocker.patch("extremal_sl.verify.random_positive", return_value=constant(-1.0, 8))
        with pytest.raises(ConvergenceError):
            positive_samples(np.random.default_rng(0), 8, 3)

    def test_random_positive_is_positive_and_deterministic(self):
        a = random_positive(np.random.default_rng(3), 128)
        b = random_positive(np.random.default_rng(3), 128)
        assert a.minimum() > 0
        np.testing.assert_array_equal(a.values, b.values)

    def test_random_potential_in_A_gamma(self):
        q = random_potential(np.random.default_rng(5), 256, GammaParam(0.85))
        assert q.minimum() > 0
        assert power_integral(q, 0.85) == pytest.approx(1.0, abs=1e-12)


class TestChecks:
    """The checks that do not need an optimizer scan."""

    @pytest.fixture
    def suite(self):
        return AcceptanceSuite(SMALL)

    def test_eigensolver(self, suite):
        assert suite.eigensolver().passed

    def test_second_variation(self, suite):
        assert suite.second_variation().passed

    def test_gradient(self, suite):
        result = suite.gradient_check()
        assert result.passed, result.detail

    def test_closed_form_period(self, suite):
        assert suite.closed_form_period().passed

    def test_period_limit(self, suite):
        assert suite.period_limit().passed

    def test_period_monotonicity(self, suite):
        assert suite.period_monotonicity().passed

    def test_period_identity(self, suite):
        result = suite.period_identity()
        assert result.passed, result.detail

    def test_holder(self, suite):
        assert suite.holder().passed

    def test_positivity_bound_uses_all_samples(self, suite):
        result = suite.positivity_bound()
        assert result.passed, result.detail
        assert "samples=1000," in result.detail

    def test_all_checks_are_listed(self, suite):
        assert len(suite.checks()) == 12


class TestRun:
    """Tests for running the suite."""

    def test_errors_become_failures(self, mocker):
        suite = AcceptanceSuite(SMALL)

        def broken():
            raise ConvergenceError("no convergence")

        def crashing():
            raise ZeroDivisionError("division by zero")

        mocker.patch.object(suite, "checks", return_value=[suite.eigensolver, broken, crashing])
        results = suite.run()
        assert [r.passed for r in results] == [True, False, False]
        assert "no convergence" in results[1].detail
        assert results[1].name == "broken"
        assert "division by zero" in results[2].detail

    def test_scan_is_shared(self, mocker):
        suite = AcceptanceSuite(SMALL)
        scan = mocker.patch("extremal_sl.verify.scan_gamma")
        suite.scan
        suite.scan
        scan.assert_called_once()
