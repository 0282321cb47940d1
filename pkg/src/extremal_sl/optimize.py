"""Minimization of G over positive functions and scans over gamma.

The descent runs in the discrete W_2^1 metric: the L2 gradient is mapped
through (K/h + W)^(-1), the tridiagonal Gram matrix of the H^1 inner product,
before the projected backtracking step. Iterates are clipped at the floor
zeta and L2-normalized, which does not change G.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
from scipy.linalg import solveh_banded

from extremal_sl.config import RunConfig, resolve_threads
from extremal_sl.errors import DomainError, ParameterError
from extremal_sl.functional import G, gradient, qstar
from extremal_sl.grid import (
    GammaParam,
    GridFunction,
    constant,
    from_callable,
    l2_norm,
    power_integral,
    trapezoid_weights,
)
from extremal_sl.sturm import lambda_k

logger = logging.getLogger(__name__)

STEP_MAX = 0.9
MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class OptimReport:
    """Outcome of one minimization of G at fixed gamma."""

    gamma: float
    m_hat: float
    minimizer: GridFunction
    extremal_potential: GridFunction
    grad_norm: float
    duality_gap: float
    lambda_qstar: float
    iterations: int
    converged: bool
    message: str = ""
    history: tuple[float, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "gamma": self.gamma,
            "m_hat": self.m_hat,
            "grad_norm": self.grad_norm,
            "duality_gap": self.duality_gap,
            "lambda_qstar": self.lambda_qstar,
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
            "n": self.minimizer.n,
            "minimizer": self.minimizer.values.tolist(),
            "extremal_potential": self.extremal_potential.values.tolist(),
        }

    def to_row(self) -> dict[str, Any]:
        return {
            "gamma": self.gamma,
            "m_hat": self.m_hat,
            "grad_norm": self.grad_norm,
            "duality_gap": self.duality_gap,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class ScanTable:
    reports: tuple[OptimReport, ...]
    # index i flags the pair (i, i + 1)
    violations: tuple[int, ...]

    @property
    def monotone(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class AlternatingReport:
    gamma: float
    eigenvalues: tuple[float, ...]
    minimizer: GridFunction
    extremal_potential: GridFunction

    @property
    def m_hat(self) -> float:
        return self.eigenvalues[-1]


def initial_guess(n: int, amplitude: float) -> GridFunction:
    """1 + amplitude * cos(pi x): the unstable direction of the constant."""
    return from_callable(lambda x: 1.0 + amplitude * np.cos(np.pi * x), n)


def _project(values: np.ndarray, zeta: float) -> np.ndarray:
    y = values / math.sqrt(float(np.dot(trapezoid_weights(values.size - 1), values * values)))
    y = np.maximum(y, zeta)
    return y / math.sqrt(float(np.dot(trapezoid_weights(values.size - 1), y * y)))


def _sobolev_gram(n: int) -> np.ndarray:
    """Upper banded form of K/h + W."""
    h = 1.0 / n
    w = trapezoid_weights(n)
    ab = np.zeros((2, n + 1))
    ab[0, 1:] = -1.0 / h
    ab[1] = 2.0 / h + w
    ab[1, 0] = ab[1, -1] = 1.0 / h + w[0]
    return ab


def _sobolev_norm(gram: np.ndarray, partial: np.ndarray, direction: Optional[np.ndarray] = None) -> float:
    if direction is None:
        direction = solveh_banded(gram, partial)
    return math.sqrt(max(float(np.dot(partial, direction)), 0.0))


def minimize_G(
    gamma: GammaParam,
    config: Optional[RunConfig] = None,
    initial: Optional[GridFunction] = None,
) -> OptimReport:
    """Projected gradient descent on G with Armijo backtracking.

    Non-convergence within the iteration budget is reported through
    `converged=False`, not raised.

    Args:
        gamma: Exponent of the potential class, 0 < gamma < 1.
        config: Grid size, tolerances and iteration budget. Defaults to RunConfig().
        initial: Positive starting function. Its grid overrides config.grid_n.

    Returns:
        OptimReport with m_hat, the minimizer, its extremal potential and the duality gap.

    Raises:
        DomainError: If the initial function is not strictly positive.
    """
    config = config or RunConfig()
    if initial is None:
        initial = initial_guess(config.grid_n, config.init_amplitude)
    if initial.minimum() <= 0:
        raise DomainError("initial function must be positive")

    n = initial.n
    w = initial.weights
    gram = _sobolev_gram(n)
    y = initial.with_values(_project(initial.values, config.zeta))
    value = G(y, gamma)
    history = [value]
    step = STEP_MAX
    grad_norm = math.inf
    converged = False
    message = "iteration budget exhausted"
    iterations = 0

    for iterations in range(1, config.max_iters + 1):
        partial = gradient(y, gamma).values * w
        direction = solveh_banded(gram, partial)
        grad_norm = _sobolev_norm(gram, partial, direction)
        if grad_norm <= config.grad_tol:
            converged = True
            message = "gradient tolerance reached"
            break

        t = step
        for _ in range(MAX_BACKTRACKS):
            trial = y.with_values(_project(y.values - t * direction, config.zeta))
            trial_value = G(trial, gamma)
            if trial_value <= value - config.armijo * t * grad_norm ** 2:
                break
            t *= 0.5
        else:
            message = "line search stalled"
            logger.debug("gamma=%g: line search stalled at iteration %d, |grad|=%.3e", gamma.gamma, iterations, grad_norm)
            break

        assert trial_value <= value, "accepted step increased G"
        y, value = trial, trial_value
        history.append(value)
        step = min(2.0 * t, STEP_MAX)
        if iterations % 500 == 0:
            logger.debug("gamma=%g it=%d G=%.15g |grad|=%.3e t=%.3g", gamma.gamma, iterations, value, grad_norm, t)

    if not converged and grad_norm <= config.grad_tol:
        converged = True

    baseline = constant(1.0, n)
    if value > G(baseline, gamma):
        # the constant trial function always attains 1
        y, value = baseline, G(baseline, gamma)
        history.append(value)
        grad_norm = _sobolev_norm(gram, gradient(y, gamma).values * w)
        converged = grad_norm <= config.grad_tol
        message += "; constant trial function kept"


    potential = qstar(y, gamma)
    lam = lambda_k(potential, 1, config.tol_alg).eigenvalue
    report = OptimReport(
        gamma=gamma.gamma,
        m_hat=value,
        minimizer=y,
        extremal_potential=potential,
        grad_norm=grad_norm,
        duality_gap=abs(lam - value),
        lambda_qstar=lam,
        iterations=iterations,
        converged=converged,
        message=message,
        history=tuple(history),
    )
    log = logger.info if converged else logger.warning
    log(
        "gamma=%g: m_hat=%.12g after %d iterations (|grad|=%.2e, gap=%.2e, %s)",
        gamma.gamma, value, iterations, grad_norm, report.duality_gap, message,
    )
    return report


def alternating_minimize(
    gamma: GammaParam,
    config: Optional[RunConfig] = None,
    iterations: int = 50,
    initial: Optional[GridFunction] = None,
) -> AlternatingReport:
    """Alternate q = qstar(y) and y = ground state of q.

    lambda_1(qstar(y)) <= G(y) and G(ground state of q) <= lambda_1(q), so the
    recorded eigenvalues never increase.
    """
    config = config or RunConfig()
    if iterations < 1:
        raise ParameterError(f"iterations must be positive, got {iterations}")
    y = initial if initial is not None else initial_guess(config.grid_n, config.init_amplitude)
    eigenvalues = []
    for _ in range(iterations):
        potential = qstar(y, gamma)
        result = lambda_k(potential, 1, config.tol_alg)
        eigenvalues.append(result.eigenvalue)
        y = result.eigenfunction
        if y.minimum() <= 0:
            raise DomainError("ground state lost positivity")
    logger.info("gamma=%g: alternating scheme reached %.12g", gamma.gamma, eigenvalues[-1])
    return AlternatingReport(
        gamma=gamma.gamma,
        eigenvalues=tuple(eigenvalues),
        minimizer=y,
        extremal_potential=potential,
    )


def _validate_gammas(gammas: Sequence[float]) -> list[GammaParam]:
    if len(gammas) == 0:
        raise ParameterError("gamma list is empty")
    params = [GammaParam(g) for g in gammas]
    for a, b in zip(params, params[1:]):
        if b.gamma <= a.gamma:
            raise ParameterError(f"gamma list must be strictly increasing ({a.gamma} then {b.gamma})")
    return params


def scan_gamma(gammas: Sequence[float], config: Optional[RunConfig] = None) -> ScanTable:
    """Minimize at every gamma; flag adjacent pairs where m_hat grows beyond the slack."""
    config = config or RunConfig()
    params = _validate_gammas(gammas)
    workers = min(resolve_threads(config), len(params))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = tuple(pool.map(lambda g: minimize_G(g, config), params))
    violations = tuple(
        i
        for i, (a, b) in enumerate(zip(reports, reports[1:]))
        if b.m_hat > a.m_hat + config.monotonicity_slack
    )
    if violations:
        logger.warning("monotonicity violated at pairs %s", list(violations))
    return ScanTable(reports=reports, violations=violations)


def el_residual(y: GridFunction, mu: float, gamma: GammaParam) -> float:
    """L2 norm of -y'' + y^r - mu*y after scaling y so that int y^p = 1."""
    if y.minimum() <= 0:
        raise DomainError(f"Euler-Lagrange residual needs a positive function, min = {y.minimum():.3g}")
    scaled = y.values * power_integral(y, gamma.p) ** (-1.0 / gamma.p)
    dy = np.diff(scaled)
    minus_laplacian = np.empty_like(scaled)
    minus_laplacian[0] = -2.0 * dy[0]
    minus_laplacian[1:-1] = dy[:-1] - dy[1:]
    minus_laplacian[-1] = 2.0 * dy[-1]
    minus_laplacian /= y.h * y.h
    residual = minus_laplacian + np.power(scaled, gamma.r) - mu * scaled
    return l2_norm(y.with_values(residual))
