"""Acceptance suite: each check reproduces one quantitative claim and reports PASS/FAIL."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from extremal_sl.config import RunConfig, resolve_threads
from extremal_sl.errors import ConvergenceError
from extremal_sl.functional import (
    G,
    gradient,
    holder_gap,
    pairing,
    positivity_bound_check,
    qstar,
    second_variation_min_eig,
)
from extremal_sl.grid import THRESHOLD_GAMMA, GammaParam, GridFunction, constant, from_callable
from extremal_sl.optimize import ScanTable, minimize_G, scan_gamma
from extremal_sl.period import (
    I0,
    I0_limit,
    expected_limit,
    monotonicity_scan,
    period_identity_error,
    roots,
    shoot,
)
from extremal_sl.sturm import lambda_k, lambda_k_richardson, normalize_to_A_gamma

logger = logging.getLogger(__name__)

SCAN_GAMMAS = tuple(round(0.5 + 0.05 * i, 10) for i in range(10))
RELATIVE_ALPHAS = (1.01, 1.1, 1.5, 2.0, 5.0, 10.0)
PROPERTY_GRID = 512
SEED = 20140531
POSITIVITY_SAMPLES = 1000
MAX_DRAWS_PER_SAMPLE = 100


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def random_positive(rng: np.random.Generator, n: int, modes: int = 5, amplitude: float = 0.3) -> GridFunction:
    """Smooth positive function 1 + sum a_k cos(k pi x) / k with |a_k| <= amplitude."""
    coeffs = rng.uniform(-amplitude, amplitude, modes)
    return from_callable(
        lambda x: 1.0 + sum(c * np.cos((k + 1) * np.pi * x) / (k + 1) for k, c in enumerate(coeffs)),
        n,
    )


def positive_samples(
    rng: np.random.Generator, n: int, count: int, modes: int = 5, amplitude: float = 0.3
) -> list[GridFunction]:
    """Draw random_positive functions until `count` strictly positive ones are collected."""
    samples: list[GridFunction] = []
    draws = 0
    while len(samples) < count:
        if draws >= MAX_DRAWS_PER_SAMPLE * count:
            raise ConvergenceError(f"only {len(samples)} of {count} positive samples after {draws} draws")
        draws += 1
        y = random_positive(rng, n, modes, amplitude)
        if y.minimum() > 0:
            samples.append(y)
    logger.debug("%d positive samples from %d draws", count, draws)
    return samples


def random_potential(rng: np.random.Generator, n: int, gamma: GammaParam) -> GridFunction:
    """exp of a smooth random function, normalized into A_gamma."""
    coeffs = rng.normal(0.0, 1.0, 4)
    q = from_callable(lambda x: np.exp(sum(c * np.cos(k * np.pi * x) for k, c in enumerate(coeffs))), n)
    return normalize_to_A_gamma(q, gamma)


class AcceptanceSuite:
    """Runs the checks lazily, sharing the expensive gamma scan between them."""

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig()
        self.rng = np.random.default_rng(SEED)

    @cached_property
    def scan(self) -> ScanTable:
        return scan_gamma(SCAN_GAMMAS, self.config)

    def _report(self, gamma: float):
        for report in self.scan.reports:
            if math.isclose(report.gamma, gamma):
                return report
        return minimize_G(GammaParam(gamma), self.config)

    # ------------------------------------------------------------------ #

    def eigensolver(self) -> CheckResult:
        n = self.config.grid_n
        lam1 = lambda_k(constant(1.0, n), 1, self.config.tol_alg).eigenvalue
        lam2 = lambda_k_richardson(constant(0.0, n), 2, self.config.tol_alg)
        ok = abs(lam1 - 1.0) <= 1e-8 and abs(lam2 - math.pi ** 2) <= 1e-6
        return CheckResult("eigensolver exactness", ok, f"lambda_1(q=1)={lam1:.12g}, lambda_2(q=0)={lam2:.12g}")

    def threshold(self) -> CheckResult:
        below = [self._report(g).m_hat for g in (0.5, 0.7)]
        below.append(minimize_G(GammaParam(0.79), self.config).m_hat)
        at_09 = self._report(0.9).m_hat
        above = [self._report(g).m_hat for g in (0.85, 0.95)]
        ok = (
            all(1.0 - 1e-3 <= m <= 1.0 + 1e-9 for m in below)
            and at_09 <= 0.96
            and all(m < 1.0 - 1e-2 for m in above)
        )
        detail = f"below={[f'{m:.9g}' for m in below]}, 0.9 -> {at_09:.6g}, above={[f'{m:.6g}' for m in above]}"
        return CheckResult("threshold reproduction", ok, detail)

    def monotonicity(self) -> CheckResult:
        m = [f"{r.m_hat:.6g}" for r in self.scan.reports]
        return CheckResult("m_gamma nonincreasing", self.scan.monotone, f"m_hat={m}, violations={list(self.scan.violations)}")

    def second_variation(self) -> CheckResult:
        value = second_variation_min_eig(GammaParam(0.9))
        at = math.pi ** 2 - 2.0 / (1.0 - THRESHOLD_GAMMA)
        below = second_variation_min_eig(GammaParam(THRESHOLD_GAMMA - 1e-6))
        above = second_variation_min_eig(GammaParam(THRESHOLD_GAMMA + 1e-6))
        ok = abs(value + 10.1303956) <= 1e-6 and abs(at) <= 1e-9 and below > 0 > above
        return CheckResult("second variation", ok, f"gamma=0.9 -> {value:.10g}, at threshold -> {at:.2e}")

    def duality(self) -> CheckResult:
        gamma = GammaParam(0.85)
        n = self.config.grid_n
        worst_up = max(
            lambda_k(qstar(y, gamma), 1, self.config.tol_alg).eigenvalue - G(y, gamma)
            for y in (random_positive(self.rng, n) for _ in range(100))
        )
        worst_down = -math.inf
        for _ in range(20):
            q = random_potential(self.rng, n, gamma)
            res = lambda_k(q, 1, self.config.tol_alg)
            worst_down = max(worst_down, G(res.eigenfunction, gamma) - res.eigenvalue)
        gap = self._report(0.9).duality_gap
        ok = worst_up <= 1e-8 and worst_down <= 1e-6 and gap <= 1e-3
        return CheckResult(
            "duality", ok, f"max lambda_1(q*)-G={worst_up:.2e}, max G(y_q)-lambda_1={worst_down:.2e}, gap={gap:.2e}"
        )

    def gradient_check(self) -> CheckResult:
        gamma = GammaParam(0.9)
        n = self.config.grid_n
        y = from_callable(lambda x: 1.0 + 0.1 * np.cos(np.pi * x), n)
        grad = gradient(y, gamma)
        worst = 0.0
        t = 1e-5
        for _ in range(5):
            bump = random_positive(self.rng, n)
            v = bump.with_values(bump.values - 1.0)
            fd = (G(y.with_values(y.values + t * v.values), gamma) - G(y.with_values(y.values - t * v.values), gamma)) / (2 * t)
            exact = pairing(grad, v)
            scale = max(abs(exact), 1e-3 * math.sqrt(pairing(grad, grad) * pairing(v, v)))
            worst = max(worst, abs(fd - exact) / scale)
        radial = abs(pairing(grad, y))
        base = G(y, gamma)
        homogeneity = max(abs(G(y.with_values(c * y.values), gamma) - base) for c in (1e-3, 1e3))
        ok = worst <= 1e-6 and radial <= 1e-10 and homogeneity <= 1e-12 * (1.0 + base)
        return CheckResult("gradient", ok, f"fd rel err={worst:.2e}, DG(y;y)={radial:.2e}, homogeneity={homogeneity:.2e}")

    def closed_form_period(self) -> CheckResult:
        gamma = GammaParam(0.5)
        tol = self.config.tol_quad
        errs = [abs(I0(gamma, a, tol).I0 - math.pi) for a in (2.1, 2.5, 5.0, 10.0)]
        lower, _, upper = roots(gamma, 2.5)
        ok = max(errs) <= 1e-8 and abs(lower - 0.5) <= 1e-12 and abs(upper - 2.0) <= 1e-12
        return CheckResult("I0 closed form", ok, f"max |I0 - pi|={max(errs):.2e}, roots=({lower:.15g}, {upper:.15g})")

    def period_limit(self) -> CheckResult:
        tol = self.config.tol_quad
        at_threshold = I0_limit(GammaParam(THRESHOLD_GAMMA), tol)
        at_09 = I0_limit(GammaParam(0.9), tol)
        ok = abs(at_threshold - math.pi ** 2 / 2) <= 1e-3 and abs(at_09 - expected_limit(GammaParam(0.9))) <= 1e-3
        return CheckResult("I0 limit", ok, f"threshold -> {at_threshold:.8g}, 0.9 -> {at_09:.8g}")

    def period_monotonicity(self) -> CheckResult:
        tol = self.config.tol_quad
        threads = resolve_threads(self.config)
        gamma = GammaParam(THRESHOLD_GAMMA)
        scan = monotonicity_scan(gamma, [gamma.alpha_min * k for k in RELATIVE_ALPHAS], tol, threads)
        half = GammaParam(0.5)
        flat = monotonicity_scan(half, [half.alpha_min * k for k in RELATIVE_ALPHAS], tol, threads)
        bound = 1.0 / (1.0 - THRESHOLD_GAMMA)
        spread = max(abs(p.I0 - math.pi) for p in flat.profiles)
        ok = scan.increasing and all(p.I0 > bound for p in scan.profiles) and spread <= 1e-8
        return CheckResult(
            "I0 lower bound and monotonicity", ok,
            f"min I0={min(p.I0 for p in scan.profiles):.10g} vs {bound:.10g}, increasing={scan.increasing}, "
            f"gamma=0.5 spread={spread:.1e}",
        )

    def period_identity(self) -> CheckResult:
        tol = self.config.tol_quad
        threshold = GammaParam(THRESHOLD_GAMMA)
        cases = [(GammaParam(0.5), 0.5, 3.0), (threshold, 0.9, 1.5 * threshold.constant_solution(0.9))]
        errors, drifts = [], []
        for gamma, mu, y0 in cases:
            traj = shoot(gamma, mu, y0)
            errors.append(period_identity_error(traj, tol))
            drifts.append(traj.energy_drift / traj.energy)
        halves = [shoot(threshold, mu, 1.5 * threshold.constant_solution(mu)).half_period for mu in (0.5, 0.9)]
        ok = max(errors) <= 1e-4 and max(drifts) <= 1e-8 and min(halves) > 1.0
        return CheckResult(
            "period identity", ok,
            f"rel errors={[f'{e:.1e}' for e in errors]}, drift={max(drifts):.1e}, periods={[f'{2 * h:.6g}' for h in halves]}",
        )

    def positivity_bound(self) -> CheckResult:
        gamma = GammaParam(0.85)
        samples = positive_samples(self.rng, PROPERTY_GRID, POSITIVITY_SAMPLES, modes=6, amplitude=0.9)
        failures = sum(not positivity_bound_check(y, gamma, eps) for y in samples for eps in (0.1, 0.3, 0.5))
        return CheckResult("positivity bound", failures == 0, f"samples={len(samples)}, counterexamples={failures}")

    def holder(self) -> CheckResult:
        gamma = GammaParam(0.85)
        n = self.config.grid_n
        worst = min(
            holder_gap(random_potential(self.rng, n, gamma), random_positive(self.rng, n), gamma) for _ in range(100)
        )
        return CheckResult("Hoelder step", worst >= -1e-10, f"min gap={worst:.3e}")

    def checks(self) -> list[Callable[[], CheckResult]]:
        return [
            self.eigensolver,
            self.threshold,
            self.monotonicity,
            self.second_variation,
            self.duality,
            self.gradient_check,
            self.closed_form_period,
            self.period_limit,
            self.period_monotonicity,
            self.period_identity,
            self.positivity_bound,
            self.holder,
        ]

    def run(self) -> list[CheckResult]:
        results = []
        for check in self.checks():
            try:
                result = check()
            except Exception as exc:
                result = CheckResult(check.__name__.replace("_", " "), False, f"error: {exc}")
            logger.info(result.line())
            results.append(result)
        return results
