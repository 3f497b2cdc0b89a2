"""Mergeable streaming moments and the one-sample Kolmogorov-Smirnov statistic."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["RunningStats", "merge_stats", "ks_statistic"]


@dataclass
class RunningStats:
    """Count, mean and central power sums ``m2..m4`` of a real stream.

    Batches are folded in with the pairwise update of Chan et al. /
    Pebay, so ``merge(a, b)`` equals the stats of the concatenated stream
    up to rounding.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0
    min: float = math.inf
    max: float = -math.inf

    @classmethod
    def from_array(cls, values):
        x = np.asarray(values, dtype=float).ravel()
        n = x.size
        if n == 0:
            return cls()
        mu = float(x.mean())
        d = x - mu
        d2 = d * d
        return cls(n, mu, float(d2.sum()), float((d2 * d).sum()), float((d2 * d2).sum()),
                   float(x.min()), float(x.max()))

    def push(self, values):
        """Fold in one value or an array of values; returns ``self``."""
        merged = merge_stats(self, RunningStats.from_array(np.atleast_1d(values)))
        self.__dict__.update(merged.__dict__)
        return self

    @property
    def variance(self):
        """Unbiased (n - 1) sample variance."""
        if self.count < 2:
            return math.nan
        return max(self.m2, 0.0) / (self.count - 1)

    @property
    def std(self):
        return math.sqrt(self.variance)

    @property
    def stderr(self):
        """Standard error of the mean."""
        return math.sqrt(self.variance / self.count) if self.count > 1 else math.nan

    @property
    def skewness(self):
        if self.count < 2 or self.m2 <= 0:
            return math.nan
        n = self.count
        return math.sqrt(n) * self.m3 / self.m2 ** 1.5

    @property
    def excess_kurtosis(self):
        if self.count < 2 or self.m2 <= 0:
            return math.nan
        n = self.count
        return n * self.m4 / (self.m2 * self.m2) - 3.0

    @property
    def variance_stderr(self):
        """Delta-method standard error of the sample variance.

        Uses the fourth central moment, so no normality is assumed.
        """
        n = self.count
        if n < 4:
            return math.nan
        mu4 = self.m4 / n
        s2 = self.variance
        return math.sqrt(max(mu4 - (n - 3) / (n - 1) * s2 * s2, 0.0) / n)


def merge_stats(a, b):
    if a.count == 0:
        return RunningStats(**b.__dict__)
    if b.count == 0:
        return RunningStats(**a.__dict__)
    na, nb = a.count, b.count
    n = na + nb
    delta = b.mean - a.mean
    d_n = delta / n
    mean = a.mean + nb * d_n
    m2 = a.m2 + b.m2 + delta * d_n * na * nb
    m3 = (a.m3 + b.m3 + delta * d_n * d_n * na * nb * (na - nb)
          + 3.0 * d_n * (na * b.m2 - nb * a.m2))
    m4 = (a.m4 + b.m4
          + delta * d_n ** 3 * na * nb * (na * na - na * nb + nb * nb)
          + 6.0 * d_n * d_n * (na * na * b.m2 + nb * nb * a.m2)
          + 4.0 * d_n * (na * b.m3 - nb * a.m3))
    return RunningStats(n, mean, m2, m3, m4, min(a.min, b.min), max(a.max, b.max))


def ks_statistic(samples, cdf):
    """Sup distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("KS statistic of an empty sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(np.abs(i / n - F)), np.max(np.abs((i - 1) / n - F))))
