"""The functionals J and G, their differentials and the extremal-potential map.

For y uniformly positive and p = 2g/(g-1),

    J(y) = int (y')^2 dx + (int y^p dx)^((g-1)/g),     G(y) = J(y) / |y|^2,

and inf G over positive y equals the least first eigenvalue over A_gamma.
Integrals use the trapezoid rule and int (y')^2 uses forward differences on
cells, so every quantity here is an exactly differentiable function of the
nodal values and pairs exactly with the discrete eigenproblem in `sturm`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from extremal_sl.errors import ConvergenceError, DomainError, ParameterError
from extremal_sl.grid import (
    GammaParam,
    GridFunction,
    constant,
    dirichlet_energy,
    inner,
    l2_norm,
    power_integral,
)
from extremal_sl.sturm import operator_bands

logger = logging.getLogger(__name__)

SECOND_VARIATION_GRID = 512
SECOND_VARIATION_TOL = 1e-3


@dataclass(frozen=True)
class FunctionalValue:
    J: float
    G: float
    l2sq: float
    powint: float


def _check_positive(y: GridFunction) -> None:
    if y.minimum() <= 0:
        raise DomainError(f"the functional is defined on positive functions only, min = {y.minimum():.3g}")


def evaluate(y: GridFunction, gamma: GammaParam) -> FunctionalValue:
    _check_positive(y)
    powint = power_integral(y, gamma.p)
    J = dirichlet_energy(y) + powint ** ((gamma.gamma - 1.0) / gamma.gamma)
    l2sq = inner(y, y)
    return FunctionalValue(J=J, G=J / l2sq, l2sq=l2sq, powint=powint)


def G(y: GridFunction, gamma: GammaParam) -> float:
    return evaluate(y, gamma).G


def _laplacian_times_h(y: np.ndarray) -> np.ndarray:
    """K y for the Neumann graph Laplacian K (row sums zero)."""
    dy = np.diff(y)
    ky = np.empty_like(y)
    ky[0] = -dy[0]
    ky[1:-1] = dy[:-1] - dy[1:]
    ky[-1] = dy[-1]
    return ky


def gradient(y: GridFunction, gamma: GammaParam) -> GridFunction:
    """L2 Riesz representer of the differential of the discrete G.

    `pairing(gradient(y), v)` equals the directional derivative of the discrete
    G at y along v, which discretizes

        (2/|y|^2) [int y'v' + (int y^p)^(-1/g) int y^r v - G(y) int y v].
    """
    fv = evaluate(y, gamma)
    g = gamma.gamma
    w = y.weights
    vals = y.values
    partial = (
        2.0 / y.h * _laplacian_times_h(vals)
        + 2.0 * fv.powint ** (-1.0 / g) * w * np.power(vals, gamma.r)
        - 2.0 * fv.G * w * vals
    ) / fv.l2sq
    return y.with_values(partial / w)


def pairing(g: GridFunction, v: GridFunction) -> float:
    """Trapezoid pairing of a gradient representer with a direction."""
    return inner(g, v)


def qstar(y: GridFunction, gamma: GammaParam) -> GridFunction:
    """Extremal potential (int y^p)^(-1/g) * y^(2/(g-1)); it lies in A_gamma."""
    _check_positive(y)
    g = gamma.gamma
    powint = power_integral(y, gamma.p)
    return y.with_values(powint ** (-1.0 / g) * np.power(y.values, 2.0 / (g - 1.0)))


def holder_lower_bound(y: GridFunction, gamma: GammaParam) -> float:
    """(int y^p)^((g-1)/g): the least value of int q y^2 over q in A_gamma."""
    _check_positive(y)
    return power_integral(y, gamma.p) ** ((gamma.gamma - 1.0) / gamma.gamma)


def holder_gap(q: GridFunction, y: GridFunction, gamma: GammaParam) -> float:
    """int q y^2 minus its Hoelder lower bound; nonnegative for q in A_gamma."""
    return inner(q, y.with_values(y.values * y.values)) - holder_lower_bound(y, gamma)


def discrete_second_variation_min_eig(gamma: GammaParam, n: int = SECOND_VARIATION_GRID) -> float:
    """Least nonconstant-mode eigenvalue of -y'' + (2/(1-g)) (int y - y), Neumann.

    The rank-one averaging term is symmetric in the trapezoid-weighted
    variables, so the discrete operator is a dense symmetric matrix whose
    constant mode has eigenvalue zero and is filtered out by its overlap.
    """
    zero = constant(0.0, n)
    d, e = operator_bands(zero)
    c = 2.0 / (1.0 - gamma.gamma)
    u = np.sqrt(zero.weights)
    matrix = np.diag(d) + np.diag(e, 1) + np.diag(e, -1) + c * (np.outer(u, u) - np.eye(n + 1))
    vals, vecs = eigh(matrix)
    nonconstant = np.abs(vecs.T @ u) < 0.5
    return float(vals[nonconstant].min())


def second_variation_min_eig(gamma: GammaParam, n: int = SECOND_VARIATION_GRID) -> float:
    """pi^2 - 2/(1-g), cross-checked against the discretized operator."""
    closed = math.pi ** 2 - 2.0 / (1.0 - gamma.gamma)
    discrete = discrete_second_variation_min_eig(gamma, n)
    if abs(closed - discrete) > SECOND_VARIATION_TOL:
        raise ConvergenceError(
            f"second variation mismatch at gamma={gamma.gamma}: closed form {closed:.8g}, discrete {discrete:.8g}"
        )
    logger.debug("second variation at gamma=%g: %.10g (discrete %.10g)", gamma.gamma, closed, discrete)
    return closed


def positivity_bound_check(y: GridFunction, gamma: GammaParam, eps: float) -> bool:
    """True iff G(y) < (pi^2/4)(1-eps)^2 implies min y > eps * |y| for this y."""
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    value = G(y, gamma)
    if value >= (math.pi ** 2 / 4.0) * (1.0 - eps) ** 2:
        return True
    return y.minimum() > eps * l2_norm(y)
