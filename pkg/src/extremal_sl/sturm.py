"""Neumann Sturm-Liouville eigenpairs of -y'' + q y = lambda y on a uniform grid.

The operator is the 3-point Laplacian with ghost-node (mirror) Neumann closure.
In the trapezoid-weighted variables z = sqrt(w) * y it becomes a symmetric
tridiagonal matrix whose quadratic form is exactly

    sum over cells of (y[i+1] - y[i])^2 / h  +  trapezoid(q * y^2),

i.e. the discrete counterpart of the pencil form used by `functional`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal, eigvalsh_tridiagonal, solve_banded

from extremal_sl.errors import ConvergenceError, DomainError, ParameterError
from extremal_sl.grid import GammaParam, GridFunction, dirichlet_energy, power_integral, refine

logger = logging.getLogger(__name__)

DEFAULT_TOL_ALG = 1e-10
INVERSE_ITERATIONS = 2
CLASS_TOL = 1e-8


@dataclass(frozen=True)
class SpectralResult:
    """Eigenpair of the discrete Neumann problem.

    `eigenfunction` has unit trapezoid L2 norm and is positive at x = 0.
    `residual` is the relative residual |S z - lambda z| / |S|.
    """

    k: int
    eigenvalue: float
    eigenfunction: GridFunction
    residual: float

    @property
    def lam(self) -> float:
        return self.eigenvalue

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "lambda": self.eigenvalue,
            "residual": self.residual,
            "n": self.eigenfunction.n,
            "eigenfunction": self.eigenfunction.values.tolist(),
        }


def _check_potential(q: GridFunction) -> None:
    if q.minimum() < 0:
        raise DomainError(f"potential must be nonnegative, min = {q.minimum():.3g}")


def operator_bands(q: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of W^(-1/2) (K/h) W^(-1/2) + diag(q)."""
    inv_h2 = 1.0 / (q.h * q.h)
    d = np.full(q.n + 1, 2.0 * inv_h2) + q.values
    e = np.full(q.n, -inv_h2)
    e[0] = e[-1] = -math.sqrt(2.0) * inv_h2
    return d, e


def _matvec(d: np.ndarray, e: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = d * z
    out[:-1] += e * z[1:]
    out[1:] += e * z[:-1]
    return out


def rayleigh_quotient(q: GridFunction, y: GridFunction) -> float:
    """Discrete Rayleigh quotient (D(y) + int q y^2) / int y^2."""
    w = y.weights
    y2 = y.values * y.values
    return (dirichlet_energy(y) + float(np.dot(w, q.values * y2))) / float(np.dot(w, y2))


def _refine_pair(d: np.ndarray, e: np.ndarray, z: np.ndarray, lam: float) -> np.ndarray:
    """Inverse iteration with a shift just below the current Rayleigh quotient."""
    ab = np.zeros((3, d.size))
    ab[0, 1:] = e
    ab[2, :-1] = e
    for _ in range(INVERSE_ITERATIONS):
        sigma = lam - 1e-8 * max(1.0, abs(lam))
        ab[1] = d - sigma
        try:
            z_new = solve_banded((1, 1), ab, z)
        except LinAlgError:
            break
        norm = np.linalg.norm(z_new)
        if not np.isfinite(norm) or norm == 0:
            break
        z = z_new / norm
        lam = float(np.dot(z, _matvec(d, e, z)))
    return z


def lambda_k(q: GridFunction, k: int = 1, tol_alg: float = DEFAULT_TOL_ALG) -> SpectralResult:
    """k-th eigenpair (1-based) of -y'' + q y = lambda y, y'(0) = y'(1) = 0.

    Args:
        q: Nonnegative potential on the uniform grid.
        k: Eigenvalue index, 1 <= k <= q.n - 1.
        tol_alg: Largest accepted relative residual of the discrete eigenpair.

    Returns:
        SpectralResult with the eigenvalue and the L2-normalized eigenfunction.

    Raises:
        ParameterError: If k is out of range.
        ConvergenceError: If the residual exceeds tol_alg.
    """
    _check_potential(q)
    if not 1 <= k <= q.n - 1:
        raise ParameterError(f"eigenvalue index must satisfy 1 <= k <= {q.n - 1}, got {k}")

    d, e = operator_bands(q)
    # Sturm-sequence bisection (stebz) brackets the eigenvalue, stein supplies the vector
    _, vecs = eigh_tridiagonal(d, e, select="i", select_range=(k - 1, k - 1), lapack_driver="stebz")
    z = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
    z = _refine_pair(d, e, z, float(np.dot(z, _matvec(d, e, z))))

    sqrt_w = np.sqrt(q.weights)
    y = z / sqrt_w
    first = np.flatnonzero(np.abs(y) > 1e-12 * np.abs(y).max())[0]
    if y[first] < 0:
        y, z = -y, -z
    eigenfunction = q.with_values(y)
    lam = rayleigh_quotient(q, eigenfunction)

    scale = 4.0 / (q.h * q.h) + float(q.values.max())
    residual = float(np.linalg.norm(_matvec(d, e, z) - lam * z)) / scale
    if residual > tol_alg:
        raise ConvergenceError(f"eigenpair k={k} residual {residual:.3e} exceeds tolerance {tol_alg:.1e}")
    logger.debug("lambda_%d = %.15g (n=%d, residual %.2e)", k, lam, q.n, residual)
    return SpectralResult(k=k, eigenvalue=lam, eigenfunction=eigenfunction, residual=residual)


def lambda_k_richardson(q: GridFunction, k: int = 1, tol_alg: float = DEFAULT_TOL_ALG) -> float:
    """One Richardson step (4 lam(2n) - lam(n)) / 3 with q refined linearly."""
    coarse = lambda_k(q, k, tol_alg).eigenvalue
    fine = lambda_k(refine(q), k, tol_alg).eigenvalue
    return (4.0 * fine - coarse) / 3.0


def spectrum(q: GridFunction, count: int) -> np.ndarray:
    """Lowest `count` eigenvalues of the discrete problem, ascending."""
    _check_potential(q)
    if not 1 <= count <= q.n - 1:
        raise ParameterError(f"count must satisfy 1 <= count <= {q.n - 1}, got {count}")
    d, e = operator_bands(q)
    return eigvalsh_tridiagonal(d, e, select="i", select_range=(0, count - 1), lapack_driver="stebz")


def normalize_to_A_gamma(q: GridFunction, gamma: GammaParam) -> GridFunction:
    """Scale q so that the integral of q^gamma equals one."""
    _check_potential(q)
    if q.values.max() == 0:
        raise DomainError("the zero potential cannot be normalized")
    g = gamma.gamma
    c = power_integral(q, g) ** (-1.0 / g)
    return q.with_values(c * q.values)


def rescale_between_classes(q: GridFunction, gamma: GammaParam, gamma1: GammaParam) -> GridFunction:
    """Map q in A_gamma to C*q in A_gamma1; C <= 1 whenever gamma1 > gamma."""
    if gamma1.gamma <= gamma.gamma:
        raise ParameterError(f"target exponent {gamma1.gamma} must exceed {gamma.gamma}")
    _check_potential(q)
    mass = power_integral(q, gamma.gamma)
    if abs(mass - 1.0) > CLASS_TOL:
        raise DomainError(f"q is not in A_{gamma.gamma}: integral of q^gamma = {mass:.12g}")
    return normalize_to_A_gamma(q, gamma1)
