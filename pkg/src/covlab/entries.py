"""Standardized entry laws, their moments, truncation and Stein checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EntryDistribution",
    "TruncationSpec",
    "distribution",
    "sample",
    "exact_moments",
    "cumulants_from_moments",
    "moments_from_cumulants",
    "truncation_threshold",
    "truncate_recenter",
    "truncation_moment_drift",
    "stein_expansion_residual",
    "resolvent_kernel",
]

KINDS = ("gaussian", "rademacher", "uniform", "two_point")
SQRT3 = math.sqrt(3.0)


def _raw_moments(kind, p):
    if kind == "gaussian":
        # (k-1)!! for even k
        return tuple(0.0 if k % 2 else float(math.prod(range(k - 1, 0, -2))) for k in range(1, 9))
    if kind == "rademacher":
        return tuple(0.0 if k % 2 else 1.0 for k in range(1, 9))
    if kind == "uniform":
        return tuple(0.0 if k % 2 else 3.0 ** (k // 2) / (k + 1) for k in range(1, 9))
    # (B - p)/sqrt(p(1-p)) with B ~ Bernoulli(p)
    s = math.sqrt(p * (1 - p))
    hi, lo = (1 - p) / s, -p / s
    return tuple(p * hi ** k + (1 - p) * lo ** k for k in range(1, 9))


@dataclass(frozen=True)
class EntryDistribution:
    """A mean-zero, unit-variance scalar law with its first eight moments.

    ``two_point`` is the standardized Bernoulli(p), which has nonzero third
    cumulant unless ``p = 1/2``.
    """

    kind: str
    p: float = 0.5
    moments: tuple = field(init=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution {self.kind!r}")
        if self.kind == "two_point" and not 0 < self.p < 1:
            raise ValueError(f"two_point needs 0 < p < 1, got {self.p}")
        m = _raw_moments(self.kind, self.p)
        # pin the standardization exactly
        m = (0.0, 1.0) + m[2:]
        object.__setattr__(self, "moments", m)

    @property
    def name(self):
        return f"two_point:{self.p:g}" if self.kind == "two_point" else self.kind

    @property
    def kappa4(self):
        return self.moments[3] - 3.0

    def omega(self, alpha):
        return self.moments[alpha - 1]

    def draw(self, rng, size):
        """Draw i.i.d. samples of the given shape from ``rng``."""
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        if self.kind == "rademacher":
            return rng.integers(0, 2, size, dtype=np.int8).astype(float) * 2.0 - 1.0
        if self.kind == "uniform":
            return rng.uniform(-SQRT3, SQRT3, size)
        s = math.sqrt(self.p * (1 - self.p))
        b = rng.random(size) < self.p
        return np.where(b, (1 - self.p) / s, -self.p / s)


def distribution(spec):
    """Parse ``gaussian``, ``rademacher``, ``uniform`` or ``two_point:p``."""
    if isinstance(spec, EntryDistribution):
        return spec
    name, _, arg = str(spec).partition(":")
    if name == "two_point":
        try:
            p = float(arg) if arg else 0.5
        except ValueError:
            raise ValueError(f"malformed two_point parameter {arg!r}") from None
        return EntryDistribution("two_point", p)
    if arg:
        raise ValueError(f"distribution {name!r} takes no parameter")
    return EntryDistribution(name)


def sample(dist, rng, count):
    if count < 0:
        raise ValueError("count must be nonnegative")
    return dist.draw(rng, count)


def exact_moments(dist):
    """Raw moments ``omega_1 .. omega_8``."""
    return dist.moments


def cumulants_from_moments(m1, m2, m3, m4):
    k1 = m1
    k2 = m2 - m1 ** 2
    k3 = m3 - 3 * m1 * m2 + 2 * m1 ** 3
    k4 = m4 - 4 * m1 * m3 - 3 * m2 ** 2 + 12 * m1 ** 2 * m2 - 6 * m1 ** 4
    return k1, k2, k3, k4


def moments_from_cumulants(k1, k2, k3, k4):
    m1 = k1
    m2 = k2 + k1 ** 2
    m3 = k3 + 3 * k2 * k1 + k1 ** 3
    m4 = k4 + 4 * k3 * k1 + 3 * k2 ** 2 + 6 * k2 * k1 ** 2 + k1 ** 4
    return m1, m2, m3, m4


@dataclass(frozen=True)
class TruncationSpec:
    t: float
    tau: float


def truncation_threshold(M, N, t):
    """Truncation level ``tau = (M N)^(1/4 - t)`` for ``0 < t < 1/4``."""
    if not 0 < t < 0.25:
        raise ValueError(f"truncation exponent must lie in (0, 1/4), got {t}")
    if not M >= N >= 1:
        raise ValueError(f"need M >= N >= 1, got M={M}, N={N}")
    return TruncationSpec(t, float(M * N) ** (0.25 - t))


def truncate_recenter(values, tau):
    """Zero out entries with ``|v| > tau``, then subtract the batch mean."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return v.copy()
    out = np.where(np.abs(v) <= tau, v, 0.0)
    out -= out.mean()
    # one correction pass drives the rounding residue of the mean to ~ulp
    out -= out.mean()
    return out


def truncation_moment_drift(dist, tau, rng, count=10 ** 6):
    """Monte Carlo change of ``E X^a`` (a = 1..5) caused by truncation at ``tau``.

    Diagnostic only; nothing downstream corrects for these drifts.
    """
    x = dist.draw(rng, count)
    xt = np.where(np.abs(x) <= tau, x, 0.0)
    return tuple(float(np.mean(xt ** a) - dist.omega(a)) for a in range(1, 6))


def resolvent_kernel(z0=3j):
    """``g(t) = 1/(t - z0)`` together with its derivatives up to order 4."""
    z0 = complex(z0)

    def deriv(a):
        c = (-1) ** a * math.factorial(a)
        return lambda t: c / (np.asarray(t) - z0) ** (a + 1)

    return [deriv(a) for a in range(5)]


def stein_expansion_residual(dist, rng, p=1, mc_size=10 ** 6, g=None, return_se=False):
    """Monte Carlo check of the cumulant expansion of ``E[xi g(xi)]``.

    Parameters
    ----------
    dist : EntryDistribution
    rng : numpy.random.Generator
    p : int
        Expansion order, 1 to 3.
    mc_size : int
    g : sequence of callables, optional
        ``g, g', ..., g^(p)``.  Defaults to ``1/(t - 3i)``.
    return_se : bool
        Also return the Monte Carlo standard error of ``E[xi g(xi)]``.

    Both expectations are estimated from the same draws.
    """
    if p not in (1, 2, 3):
        raise ValueError(f"expansion order p must be 1, 2 or 3, got {p}")
    if g is None:
        g = resolvent_kernel()
    if len(g) < p + 1:
        raise ValueError(f"need g and its first {p} derivatives")
    xi = dist.draw(rng, mc_size)
    kappa = cumulants_from_moments(*dist.moments[:4])
    lhs_samples = xi * np.asarray(g[0](xi))
    lhs = np.mean(lhs_samples)
    rhs = sum(kappa[a] / math.factorial(a) * np.mean(g[a](xi)) for a in range(p + 1))
    resid = float(abs(lhs - rhs))
    if return_se:
        d = lhs_samples - lhs
        se = float(np.sqrt(np.mean(np.abs(d) ** 2) / mc_size))
        return resid, se
    return resid
