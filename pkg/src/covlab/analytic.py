"""Closed-form limits for the renormalized sample covariance ensemble.

Semicircle and Marchenko-Pastur densities, the semicircle Stieltjes
transform, the two-term expansion of the expected Stieltjes transform and
the limiting variance of linear eigenvalue statistics.  Unit entry
variance is assumed throughout.

Spectral parameters are plain Python ``complex`` values ``z = E + 1j*eta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "TestFunction",
    "ExpansionTerms",
    "QuadratureSpec",
    "EdgeError",
    "semicircle_density",
    "mp_density",
    "semicircle_stieltjes",
    "self_consistency_residual",
    "expansion_prediction",
    "variance_functional",
    "variance_terms",
    "test_function",
    "TEST_FUNCTIONS",
    "semicircle_mass",
    "mp_mass",
    "semicircle_cdf",
]

FD_STEP = 1e-6


class EdgeError(ValueError):
    """Raised when ``1 - f(z)**2`` is too small to evaluate the expansion."""


def _check_upper(z):
    z = complex(z)
    if not z.imag > 0:
        raise ValueError(f"spectral parameter must have Im z > 0, got {z!r}")
    return z


@dataclass(frozen=True)
class TestFunction:
    """A real test function with an optional analytic derivative.

    ``eval`` and ``deriv`` must accept numpy arrays.
    """

    __test__ = False  # not a pytest class

    name: str
    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x):
        return self.eval(x)

    def derivative(self, x):
        if self.deriv is not None:
            return self.deriv(x)
        return (self.eval(x + FD_STEP) - self.eval(x - FD_STEP)) / (2 * FD_STEP)


def _poly(k):
    return TestFunction(f"x{k}" if k > 1 else "x",
                        lambda x, k=k: np.asarray(x, dtype=float) ** k,
                        lambda x, k=k: k * np.asarray(x, dtype=float) ** (k - 1))


TEST_FUNCTIONS = {
    "1": TestFunction("1", lambda x: np.ones_like(np.asarray(x, dtype=float)),
                      lambda x: np.zeros_like(np.asarray(x, dtype=float))),
    "x": _poly(1),
    "x2": _poly(2),
    "x3": _poly(3),
    "x4": _poly(4),
    "x5": _poly(5),
    "x6": _poly(6),
    "cos": TestFunction("cos", np.cos, lambda x: -np.sin(x)),
    "gauss": TestFunction("gauss", lambda x: np.exp(-np.asarray(x) ** 2),
                          lambda x: -2 * np.asarray(x) * np.exp(-np.asarray(x) ** 2)),
    "tanh": TestFunction("tanh", np.tanh, lambda x: 1 - np.tanh(x) ** 2),
}


def test_function(name):
    """Look up a library test function by name (``x``, ``x2``, ``cos``, ...)."""
    try:
        return TEST_FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown test function {name!r}; "
                         f"choose from {sorted(TEST_FUNCTIONS)}") from None


test_function.__test__ = False


@dataclass(frozen=True)
class ExpansionTerms:
    leading: complex
    first_order: complex
    second_order: complex

    @property
    def total(self):
        return self.leading + self.first_order + self.second_order

    def partial(self, k):
        """Sum of the first ``k + 1`` terms (``k`` corrections)."""
        return sum((self.leading, self.first_order, self.second_order)[: k + 1])


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor Gauss-Legendre rule in angle coordinates ``lambda = 2 cos(theta)``."""

    order: int = 200
    diag_threshold: float = 1e-8

    def __post_init__(self):
        if self.order < 8:
            raise ValueError("quadrature order must be >= 8")
        if not self.diag_threshold > 0:
            raise ValueError("diag_threshold must be positive")


def semicircle_density(x):
    """Semicircle density ``sqrt(4 - x^2) / (2 pi)`` on ``[-2, 2]``."""
    x = np.asarray(x, dtype=float)
    out = np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2 * np.pi)
    return out if out.ndim else float(out)


def mp_density(x, y):
    """Marchenko-Pastur density with ratio ``0 < y <= 1`` and unit variance."""
    if not 0 < y <= 1:
        raise ValueError(f"ratio y must lie in (0, 1], got {y}")
    x = np.asarray(x, dtype=float)
    a = (1 - math.sqrt(y)) ** 2
    b = (1 + math.sqrt(y)) ** 2
    inside = (x > a) & (x < b)
    xs = np.where(inside, x, 1.0)
    out = np.where(inside, np.sqrt(np.clip((b - xs) * (xs - a), 0, None)) / (2 * np.pi * xs * y), 0.0)
    return out if out.ndim else float(out)


def semicircle_stieltjes(z):
    """Stieltjes transform of the semicircle law.

    Both roots of ``f^2 + z f + 1 = 0`` are formed and the one in the upper
    half plane is returned, which sidesteps the branch cut of the principal
    square root.
    """
    z = _check_upper(z)
    s = np.sqrt(complex(z * z - 4))
    r1 = (-z + s) / 2
    r2 = (-z - s) / 2
    # roots multiply to 1: invert the non-physical root, which is computed
    # without cancellation
    other = r2 if r1.imag > r2.imag else r1
    return complex(1.0 / other)


def self_consistency_residual(z, f_value):
    """``|f + 1/(z + f)|``; zero exactly when ``f`` solves the fixed point."""
    z = _check_upper(z)
    den = z + complex(f_value)
    if abs(den) < 1e-14:
        raise ValueError("degenerate denominator z + f")
    return abs(complex(f_value) + 1.0 / den)


def expansion_prediction(z, N, M, kappa4):
    """Two-term asymptotic expansion of the expected Stieltjes transform.

    Returns the semicircle value, the ``sqrt(N/M)`` correction and the
    ``1/N`` correction (which carries the fourth cumulant) separately.
    """
    z = _check_upper(z)
    if N < 2 or M < N:
        raise ValueError(f"need N >= 2 and M >= N, got N={N}, M={M}")
    f = semicircle_stieltjes(z)
    f2 = f * f
    one_m = 1 - f2
    if abs(one_m) < 1e-10:
        raise EdgeError(f"z={z!r} too close to the spectral edge")
    first = -math.sqrt(N / M) * f2 * f2 / one_m
    second = f * (f2 / one_m ** 2 + kappa4 * f2 / one_m) / N
    return ExpansionTerms(f, first, second)


def _angle_rule(order):
    t, w = np.polynomial.legendre.leggauss(order)
    theta = 0.5 * np.pi * (t + 1)
    return theta, 0.5 * np.pi * w


def _divided_difference(phi, lam1, lam2, threshold):
    d = lam1 - lam2
    near = np.abs(d) < threshold
    safe = np.where(near, 1.0, d)
    dd = (phi(lam1) - phi(lam2)) / safe
    if near.any():
        dd = np.where(near, phi.derivative(lam1), dd)
    return dd


def variance_terms(phi, kappa4=0.0, quad=QuadratureSpec(), transpose=False):
    """Return ``(double_integral_term, kurtosis_term)`` of the limiting variance."""
    theta, w = _angle_rule(quad.order)
    lam = 2 * np.cos(theta)
    l1, l2 = lam[:, None], lam[None, :]
    if transpose:
        l1, l2 = l2, l1
    dd = _divided_difference(phi, l1, l2, quad.diag_threshold)
    kernel = 4.0 - l1 * l2
    double = float(w @ (dd * dd * kernel) @ w) / (2 * np.pi ** 2)
    first_moment = float(np.sum(w * phi(lam) * lam))
    kurt = kappa4 * first_moment ** 2 / (4 * np.pi ** 2)
    return double, kurt


def variance_functional(phi, kappa4=0.0, quad=QuadratureSpec()):
    """Limiting variance of the centred linear statistic ``sum phi(lambda_i)``.

    The ``lambda = 2 cos(theta)`` substitution removes the inverse square
    root singularities at ``+-2``, so the tensor Gauss-Legendre rule
    converges spectrally for smooth ``phi``.

    Examples
    --------
    >>> round(variance_functional(test_function("x"), kappa4=-2.0), 10)
    0.0
    >>> round(variance_functional(test_function("x2")), 10)
    4.0
    """
    double, kurt = variance_terms(phi, kappa4, quad)
    if double < -1e-10:
        raise ArithmeticError(f"double integral term is negative: {double}")
    return double + kurt


def semicircle_mass(order=200):
    """Gauss-Legendre integral of the semicircle density over ``[-2, 2]``."""
    theta, w = _angle_rule(order)
    lam = 2 * np.cos(theta)
    # d lambda = 2 sin(theta) d theta
    return float(np.sum(w * semicircle_density(lam) * 2 * np.sin(theta)))


def mp_mass(y, order=200):
    """Gauss-Legendre integral of the Marchenko-Pastur density over its support."""
    a = (1 - math.sqrt(y)) ** 2
    b = (1 + math.sqrt(y)) ** 2
    theta, w = _angle_rule(order)
    x = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(theta)
    half = 0.5 * (b - a)
    # sqrt((b-x)(x-a)) = half*sin(theta) and dx = half*sin(theta) dtheta
    vals = (half * np.sin(theta)) ** 2 / (2 * np.pi * x * y)
    return float(np.sum(w * vals))


def semicircle_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    return 0.5 + (x * np.sqrt(4 - x * x) + 4 * np.arcsin(x / 2)) / (4 * np.pi)
