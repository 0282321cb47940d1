"""Uniform-grid functions on [0, 1] with trapezoid quadrature and power integrals."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence, Union

import mpmath as mp
import numpy as np
from scipy.integrate import trapezoid

from extremal_sl.errors import DomainError, ParameterError

logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]

MIN_NODES = 3


def _threshold_gamma() -> float:
    with mp.workdps(50):
        return float(1 - 2 / mp.pi ** 2)


# gamma at which the second variation of G at the constant changes sign
THRESHOLD_GAMMA = _threshold_gamma()


@lru_cache(maxsize=32)
def trapezoid_weights(n: int) -> np.ndarray:
    """Read-only trapezoid weights of the grid with n cells."""
    w = np.full(n + 1, 1.0 / n)
    w[0] = w[-1] = 0.5 / n
    w.setflags(write=False)
    return w


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real function sampled on the n+1 equispaced nodes of [0, 1].

    The values array is copied on construction and frozen, so instances can be
    shared between threads.
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if arr.size < MIN_NODES:
            raise DomainError(f"a grid function needs at least {MIN_NODES} nodes, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("grid function values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        """Number of cells; the grid has n + 1 nodes."""
        return self.values.size - 1

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n + 1)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights; they sum to one."""
        return trapezoid_weights(self.n)

    def minimum(self) -> float:
        return float(self.values.min())

    def with_values(self, values: ArrayLike) -> "GridFunction":
        """Return a function on the same grid carrying new values."""
        out = GridFunction(values)
        if out.n != self.n:
            raise ParameterError(f"grid size mismatch: {out.n} != {self.n}")
        return out

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"GridFunction(n={self.n}, min={self.values.min():.6g}, max={self.values.max():.6g})"


@dataclass(frozen=True)
class GammaParam:
    """Validated exponent gamma in (0, 1) and the exponents derived from it."""

    gamma: float

    def __post_init__(self) -> None:
        g = float(self.gamma)
        if not math.isfinite(g) or not 0.0 < g < 1.0:
            raise ParameterError(f"gamma must lie in the open interval (0, 1), got {self.gamma!r}")
        object.__setattr__(self, "gamma", g)

    @property
    def p(self) -> float:
        """Exponent 2g/(g-1) of the power integral in J."""
        return 2.0 * self.gamma / (self.gamma - 1.0)

    @property
    def r(self) -> float:
        """Exponent (g+1)/(g-1) of the Euler-Lagrange nonlinearity."""
        return (self.gamma + 1.0) / (self.gamma - 1.0)

    @property
    def threshold(self) -> float:
        return THRESHOLD_GAMMA

    @property
    def alpha_min(self) -> float:
        g = self.gamma
        return g ** (-g) * (1.0 - g) ** (g - 1.0)

    def constant_solution(self, mu: float) -> float:
        """Value y_c of the constant solution of -y'' + y^r = mu*y."""
        if mu <= 0:
            raise ParameterError(f"mu must be positive, got {mu}")
        return mu ** ((self.gamma - 1.0) / 2.0)


def build(values: ArrayLike) -> GridFunction:
    """Build a GridFunction from at least three finite samples."""
    return GridFunction(values)


def from_callable(func: Callable[[np.ndarray], np.ndarray], n: int) -> GridFunction:
    """Sample a vectorised callable on the n+1 nodes of [0, 1]."""
    if n < MIN_NODES - 1:
        raise ParameterError(f"n must be at least {MIN_NODES - 1}, got {n}")
    x = np.linspace(0.0, 1.0, n + 1)
    return GridFunction(np.broadcast_to(np.asarray(func(x), dtype=float), x.shape))


def constant(c: float, n: int) -> GridFunction:
    return from_callable(lambda x: np.full_like(x, float(c)), n)


def step(a: float, b: float, height: float, n: int) -> GridFunction:
    """Step potential equal to `height` on [a, b] and 0 elsewhere.

    Nodes that fall on a jump carry the mean of the one-sided values, which
    makes the trapezoid rule exact for grid-aligned steps.
    """
    if not 0.0 <= a < b <= 1.0:
        raise ParameterError(f"step support must satisfy 0 <= a < b <= 1, got [{a}, {b}]")
    x = np.linspace(0.0, 1.0, n + 1)
    values = np.where((x > a) & (x < b), float(height), 0.0)
    tol = 1e-9 / n
    for edge, inside in ((a, a > 0.0), (b, b < 1.0)):
        on_edge = np.abs(x - edge) < tol
        values[on_edge] = 0.5 * height if inside else height
    return GridFunction(values)


def refine(f: GridFunction) -> GridFunction:
    """Linear interpolation of f onto the grid with 2n cells."""
    fine = np.empty(2 * f.n + 1)
    fine[0::2] = f.values
    fine[1::2] = 0.5 * (f.values[:-1] + f.values[1:])
    return GridFunction(fine)


def integrate(f: GridFunction) -> float:
    """Trapezoid value of the integral of f over [0, 1]; exact for affine samples."""
    return float(trapezoid(f.values, dx=f.h))


def inner(f: GridFunction, g: GridFunction) -> float:
    """Trapezoid L2 inner product."""
    if f.n != g.n:
        raise ParameterError(f"grid size mismatch: {f.n} != {g.n}")
    return float(trapezoid(f.values * g.values, dx=f.h))


def l2_norm(f: GridFunction) -> float:
    return math.sqrt(inner(f, f))


def dirichlet_energy(y: GridFunction) -> float:
    """Forward-difference value of the integral of (y')^2: sum of dy^2 / h over cells."""
    dy = np.diff(y.values)
    return float(np.dot(dy, dy) / y.h)


def _powers(y: GridFunction, p: float) -> np.ndarray:
    if p < 0 and y.minimum() <= 0:
        raise DomainError(f"negative power {p} needs a strictly positive function, min = {y.minimum():.3g}")
    if p != int(p) and y.minimum() < 0:
        raise DomainError(f"fractional power {p} needs a nonnegative function, min = {y.minimum():.3g}")
    return np.power(y.values, p)


def power_integral(y: GridFunction, p: float) -> float:
    """Trapezoid value of the integral of y^p; y must be positive when p < 0."""
    return float(trapezoid(_powers(y, p), dx=y.h))


def gen_mean(q: GridFunction, s: float) -> float:
    """Power mean (int q^s dx)^(1/s) for s != 0."""
    if s == 0:
        raise ParameterError("gen_mean is undefined at s = 0")
    return power_integral(q, s) ** (1.0 / s)
