"""Cumulant expansion of E[xi g(xi)] for the built-in entry laws.

For a Gaussian the one-term expansion E[xi g(xi)] = E[g'(xi)] is exact.
For other laws each extra cumulant removes part of the gap, and what is
left is the contribution of the cumulants that were not included.
"""
import numpy as np

from covlab.entries import (cumulants_from_moments, distribution, stein_expansion_residual,
                            truncate_recenter, truncation_threshold)

for name in ("gaussian", "rademacher", "uniform", "two_point:0.2"):
    d = distribution(name)
    k = cumulants_from_moments(*d.moments[:4])
    print(f"{name:14s} omega_4={d.omega(4):.4f} kappa_3={k[2]:+.4f} kappa_4={k[3]:+.4f}")
    for p in (1, 2, 3):
        r, se = stein_expansion_residual(d, np.random.default_rng(p), p=p, mc_size=400_000,
                                         return_se=True)
        print(f"    p={p}: residual {r:.2e}  (MC SE {se:.1e})")

# truncation at tau = (MN)^(1/4 - t) followed by recentring
spec = truncation_threshold(4096, 64, 0.1)
x = distribution("gaussian").draw(np.random.default_rng(0), 10 ** 6) * 2
y = truncate_recenter(x, spec.tau)
print(f"\ntau={spec.tau:.3f}: clipped {np.sum(np.abs(x) > spec.tau)} of {x.size} values, "
      f"mean after recentring {y.mean():.1e}")
