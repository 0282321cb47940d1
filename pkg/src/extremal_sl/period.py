"""Period analysis of the Euler-Lagrange equation -y'' + y^r = mu*y.

Nonconstant solutions oscillate with half-period mu^(-1/2) (1-g) I0(alpha_hat),
where I0(alpha) is the integral of 1/sqrt(f_alpha) over the positivity window of
f_alpha(t) = alpha t^(2g) - t^2 - 1 and alpha_hat is a rescaling of the first
integral E = (y')^2 + mu y^2 + ((1-g)/g) y^p.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import BarycentricInterpolator
from scipy.optimize import brentq

from extremal_sl.errors import ConvergenceError, EmptyWindowError, ParameterError
from extremal_sl.grid import GammaParam

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
MIN_PANELS = 8
MAX_PANELS = 2 ** 22
LIMIT_EXPONENTS = (2, 3, 4, 5, 6)
ROOT_XTOL = 1e-15
EVENT_MIN_X = 1e-9


@dataclass(frozen=True)
class PeriodProfile:
    alpha: float
    omega_minus: float
    tau: float
    omega_plus: float
    I0: float
    err: float

    def to_row(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "omega_minus": self.omega_minus,
            "omega_plus": self.omega_plus,
            "I0": self.I0,
            "err": self.err,
        }


@dataclass(frozen=True)
class MonotonicityScan:
    profiles: tuple[PeriodProfile, ...]
    increasing: bool


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Shooting solution from (y0, 0) up to the next turning point."""

    gamma: float
    mu: float
    y0: float
    energy: float
    alpha_hat: float
    half_period: float
    energy_drift: float
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    dy: np.ndarray = field(repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "gamma": self.gamma,
            "mu": self.mu,
            "y0": self.y0,
            "energy": self.energy,
            "alpha_hat": self.alpha_hat,
            "half_period": self.half_period,
            "energy_drift": self.energy_drift,
            "samples": [[float(a), float(b), float(c)] for a, b, c in zip(self.x, self.y, self.dy)],
        }


# --------------------------------------------------------------------------- #
# The profile f_alpha
# --------------------------------------------------------------------------- #

def f_alpha(t, gamma: GammaParam, alpha: float):
    return alpha * np.power(t, 2.0 * gamma.gamma) - np.square(t) - 1.0


def f_alpha_prime(t, gamma: GammaParam, alpha: float):
    g = gamma.gamma
    return 2.0 * alpha * g * np.power(t, 2.0 * g - 1.0) - 2.0 * t


def f_alpha_second(t, gamma: GammaParam, alpha: float):
    g = gamma.gamma
    return 2.0 * alpha * g * (2.0 * g - 1.0) * np.power(t, 2.0 * g - 2.0) - 2.0


def alpha_min(gamma: GammaParam) -> float:
    """Least alpha for which f_alpha has a positivity window: g^(-g) (1-g)^(g-1)."""
    value = gamma.alpha_min
    tau = (value * gamma.gamma) ** (1.0 / (2.0 - 2.0 * gamma.gamma))
    if abs(f_alpha(tau, gamma, value)) > 1e-10:
        raise ConvergenceError(f"profile is not tangent at alpha_min for gamma={gamma.gamma}")
    return value


def tau_alpha(gamma: GammaParam, alpha: float) -> float:
    """Maximizer (alpha g)^(1/(2-2g)) of f_alpha."""
    return (alpha * gamma.gamma) ** (1.0 / (2.0 - 2.0 * gamma.gamma))


def roots(gamma: GammaParam, alpha: float) -> tuple[float, float, float]:
    """(omega_minus, tau, omega_plus): the positivity window of f_alpha and its maximizer."""
    amin = gamma.alpha_min
    if not alpha > amin * (1.0 + 1e-12):
        raise EmptyWindowError(f"f_alpha has no positivity window for alpha={alpha} <= alpha_min={amin:.15g}")

    def f(t: float) -> float:
        return float(f_alpha(t, gamma, alpha))

    tau = tau_alpha(gamma, alpha)
    lower = brentq(f, 0.0, tau, xtol=ROOT_XTOL, maxiter=500)
    hi = 2.0 * tau
    while f(hi) >= 0.0:
        hi *= 2.0
    upper = brentq(f, tau, hi, xtol=ROOT_XTOL, maxiter=500)
    return lower, tau, upper


def _f_near(d: np.ndarray, root: float, side: int, gamma: GammaParam, alpha: float) -> np.ndarray:
    """f_alpha(root + side*d) computed as a difference from f_alpha(root) = 0."""
    g2 = 2.0 * gamma.gamma
    power_part = alpha * root ** g2 * np.expm1(g2 * np.log1p(side * d / root))
    return power_part - side * d * (2.0 * root + side * d)


def _midpoint_sum(gamma: GammaParam, alpha: float, lower: float, upper: float, panels: int) -> float:
    theta = (np.arange(panels) + 0.5) * (0.5 * math.pi / panels)
    span = upper - lower
    s2 = np.sin(theta) ** 2
    c2 = np.cos(theta) ** 2
    left = theta < 0.25 * math.pi
    f = np.empty(panels)
    f[left] = _f_near(span * s2[left], lower, 1, gamma, alpha)
    f[~left] = _f_near(span * c2[~left], upper, -1, gamma, alpha)
    if np.any(f <= 0):
        raise ConvergenceError(f"profile not positive inside its window at alpha={alpha}")
    integrand = 2.0 * span * np.sin(theta) * np.cos(theta) / np.sqrt(f)
    return float(integrand.sum() * (0.5 * math.pi / panels))


def I0(gamma: GammaParam, alpha: float, tol: float = DEFAULT_TOL) -> PeriodProfile:
    """Integral of 1/sqrt(f_alpha) over (omega_minus, omega_plus).

    Substituting t = omega_minus + (omega_plus - omega_minus) sin^2(theta)
    removes both inverse square-root endpoint singularities; the composite
    midpoint rule in theta is doubled until successive values differ by < tol.

    Args:
        gamma: Exponent parameter.
        alpha: Level of the profile, must exceed alpha_min(gamma).
        tol: Absolute tolerance between successive panel doublings.

    Returns:
        PeriodProfile with the roots, I0 and the last doubling difference as err.

    Raises:
        EmptyWindowError: If alpha <= alpha_min(gamma).
        ConvergenceError: If the panel limit is reached before tol.
    """
    lower, tau, upper = roots(gamma, alpha)
    panels = MIN_PANELS
    previous = _midpoint_sum(gamma, alpha, lower, upper, panels)
    while panels < MAX_PANELS:
        panels *= 2
        current = _midpoint_sum(gamma, alpha, lower, upper, panels)
        err = abs(current - previous)
        if err < tol:
            logger.debug("I0(alpha=%.12g) = %.15g with %d panels", alpha, current, panels)
            return PeriodProfile(alpha, lower, tau, upper, current, err)
        previous = current
    raise ConvergenceError(f"I0 at alpha={alpha} did not reach tolerance {tol:.1e} within {MAX_PANELS} panels")


def I0_limit(gamma: GammaParam, tol: float = DEFAULT_TOL) -> float:
    """Limit of I0 as alpha decreases to alpha_min, by extrapolation in sqrt(alpha - alpha_min)."""
    amin = gamma.alpha_min
    offsets = [amin * 10.0 ** (-k) for k in LIMIT_EXPONENTS]
    values = [I0(gamma, amin + d, tol).I0 for d in offsets]
    limit = float(BarycentricInterpolator(np.sqrt(offsets), values)(0.0))
    logger.debug("I0 limit at gamma=%g: %.12g", gamma.gamma, limit)
    return limit


def expected_limit(gamma: GammaParam) -> float:
    """pi / sqrt(2 (1-g)), the near-tangency value of I0."""
    return math.pi / math.sqrt(2.0 * (1.0 - gamma.gamma))


def monotonicity_scan(
    gamma: GammaParam,
    alphas: Sequence[float],
    tol: float = DEFAULT_TOL,
    threads: Optional[int] = None,
) -> MonotonicityScan:
    """I0 on an alpha grid; `increasing` is true iff every step exceeds the quadrature error."""
    if len(alphas) == 0:
        raise ParameterError("alpha list is empty")
    with ThreadPoolExecutor(max_workers=threads or 1) as pool:
        profiles = tuple(pool.map(lambda a: I0(gamma, a, tol), alphas))
    increasing = len(profiles) > 1 and all(
        b.I0 - a.I0 > 2.0 * (a.err + b.err) + 64.0 * np.finfo(float).eps * abs(b.I0)
        for a, b in zip(profiles, profiles[1:])
    )
    return MonotonicityScan(profiles=profiles, increasing=increasing)


# --------------------------------------------------------------------------- #
# Truncated integral and endpoint tails (independent oracle for I0)
# --------------------------------------------------------------------------- #

def endpoint_tail(gamma: GammaParam, alpha: float, root: float, eps: float, side: int) -> float:
    """Two-term expansion of the integral of 1/sqrt(f) over the eps-neighbourhood inside a root."""
    f1 = side * float(f_alpha_prime(root, gamma, alpha))
    f2 = float(f_alpha_second(root, gamma, alpha))
    return (2.0 * math.sqrt(eps) - (f2 / (4.0 * f1)) * (2.0 / 3.0) * eps ** 1.5) / math.sqrt(f1)


def I_eps(gamma: GammaParam, alpha: float, eps: float, tol: float = DEFAULT_TOL) -> float:
    """Integral of 1/sqrt(f_alpha) over (omega_minus + eps, omega_plus - eps) by adaptive quadrature."""
    lower, _, upper = roots(gamma, alpha)
    if not 0.0 < 2.0 * eps < upper - lower:
        raise ParameterError(f"eps={eps} does not fit inside the window")

    def integrand(t: float) -> float:
        if t - lower < upper - t:
            f = _f_near(np.array([t - lower]), lower, 1, gamma, alpha)[0]
        else:
            f = _f_near(np.array([upper - t]), upper, -1, gamma, alpha)[0]
        return 1.0 / math.sqrt(f)

    value, _ = quad(integrand, lower + eps, upper - eps, epsabs=tol / 10.0, epsrel=1e-13, limit=2000)
    return float(value)


def I0_oracle(gamma: GammaParam, alpha: float, tol: float = DEFAULT_TOL) -> float:
    """I_eps at eps = 1e-6 (omega_plus - omega_minus) plus both analytic endpoint tails."""
    lower, _, upper = roots(gamma, alpha)
    eps = 1e-6 * (upper - lower)
    return (
        I_eps(gamma, alpha, eps, tol)
        + endpoint_tail(gamma, alpha, lower, eps, 1)
        + endpoint_tail(gamma, alpha, upper, eps, -1)
    )


# --------------------------------------------------------------------------- #
# Shooting on the Euler-Lagrange equation
# --------------------------------------------------------------------------- #

def energy(y, dy, gamma: GammaParam, mu: float):
    """First integral (y')^2 + mu y^2 + ((1-g)/g) y^p."""
    g = gamma.gamma
    return np.square(dy) + mu * np.square(y) + ((1.0 - g) / g) * np.power(y, gamma.p)


def alpha_hat(e: float, gamma: GammaParam, mu: float) -> float:
    g = gamma.gamma
    return (g / (1.0 - g)) ** (1.0 - g) * mu ** (-g) * e


def predicted_half_period(gamma: GammaParam, mu: float, alpha: float, tol: float = DEFAULT_TOL) -> float:
    """mu^(-1/2) (1-g) I0(alpha)."""
    return (1.0 - gamma.gamma) * I0(gamma, alpha, tol).I0 / math.sqrt(mu)


def shoot(
    gamma: GammaParam,
    mu: float,
    y0: float,
    rtol: float = 1e-12,
    atol: float = 1e-12,
    max_x: float = 1e4,
) -> Trajectory:
    """Integrate y'' = y^r - mu*y from (y0, 0) to the next zero of y'.

    Args:
        gamma: Exponent parameter; r = (gamma+1)/(gamma-1).
        mu: Positive spectral parameter.
        y0: Positive starting value, different from the constant solution.
        rtol: Relative tolerance of the DOP853 integration.
        atol: Absolute tolerance of the DOP853 integration.
        max_x: Integration horizon.

    Returns:
        Trajectory up to the turning point, with its energy, alpha_hat and half period.

    Raises:
        ParameterError: For nonpositive mu or y0, or y0 on the constant solution.
        ConvergenceError: If the solution collapses to 0 or never turns.
    """
    if mu <= 0:
        raise ParameterError(f"mu must be positive, got {mu}")
    if y0 <= 0:
        raise ParameterError(f"y0 must be positive, got {y0}")
    y_c = gamma.constant_solution(mu)
    if abs(y0 - y_c) <= 1e-9 * y_c:
        raise ParameterError(f"y0={y0} is the constant solution; there is no oscillation to time")

    r = gamma.r
    floor = 1e-8 * min(y0, y_c)

    def rhs(x, s):
        return [s[1], s[0] ** r - mu * s[0]]

    def turning(x, s):
        return s[1]

    def collapse(x, s):
        return s[0] - floor

    # above y_c the solution first descends, so the next turning point has y' rising through 0
    turning.direction = 1.0 if y0 > y_c else -1.0
    turning.terminal = True
    collapse.terminal = True
    collapse.direction = -1.0

    sol = solve_ivp(rhs, (0.0, max_x), [y0, 0.0], method="DOP853", rtol=rtol, atol=atol, events=[turning, collapse])
    if sol.status == -1:
        raise ConvergenceError(f"integration failed: {sol.message}")
    if len(sol.t_events[1]):
        raise ConvergenceError(f"trajectory collapsed towards y = 0 at x={sol.t_events[1][0]:.6g}")
    if not len(sol.t_events[0]) or sol.t_events[0][0] <= EVENT_MIN_X:
        raise ConvergenceError(f"no turning point within x <= {max_x}")

    half = float(sol.t_events[0][0])
    y, dy = sol.y
    e0 = float(energy(y0, 0.0, gamma, mu))
    drift = float(np.max(np.abs(energy(y, dy, gamma, mu) - e0)))
    traj = Trajectory(
        gamma=gamma.gamma,
        mu=mu,
        y0=y0,
        energy=e0,
        alpha_hat=alpha_hat(e0, gamma, mu),
        half_period=half,
        energy_drift=drift,
        x=sol.t,
        y=y,
        dy=dy,
    )
    logger.debug("shoot gamma=%g mu=%g y0=%g: half period %.12g, drift %.2e", gamma.gamma, mu, y0, half, drift)
    return traj


def period_identity_error(traj: Trajectory, tol: float = DEFAULT_TOL) -> float:
    """Relative gap between the shooting period and 2 mu^(-1/2) (1-g) I0(alpha_hat)."""
    gamma = GammaParam(traj.gamma)
    predicted = predicted_half_period(gamma, traj.mu, traj.alpha_hat, tol)
    return abs(2.0 * traj.half_period - 2.0 * predicted) / (2.0 * traj.half_period)


def period_identity_check(gamma: GammaParam, mu: float, y0: float, tol: float = DEFAULT_TOL) -> float:
    return period_identity_error(shoot(gamma, mu, y0), tol)
