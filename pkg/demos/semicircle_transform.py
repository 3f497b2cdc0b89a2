"""Limiting spectrum of the renormalized sample covariance matrix.

Draws one large realization of H = X^T X / sqrt(MN) - sqrt(M/N) I and
compares its eigenvalue histogram and Stieltjes transform with the
semicircle law.
"""
import numpy as np

from covlab import (EnsembleConfig, distribution, semicircle_density, semicircle_stieltjes,
                    self_consistency_residual)
from covlab.analytic import semicircle_cdf
from covlab.montecarlo import collect_spectra

cfg = EnsembleConfig(N=400, M=400 * 64, dist=distribution("rademacher"), replicas=4,
                     sampler="entries")
lam = collect_spectra(cfg).ravel()
print(f"{lam.size} eigenvalues, range [{lam.min():.3f}, {lam.max():.3f}]")

# histogram against the bin-averaged semicircle density
edges = np.linspace(-2.4, 2.4, 25)
counts, _ = np.histogram(lam, edges)
width = edges[1] - edges[0]
expected = np.diff(semicircle_cdf(edges)) / width
print("\n   bin centre   empirical   semicircle")
for c, e, x in zip(counts / (lam.size * width), expected, 0.5 * (edges[1:] + edges[:-1])):
    print(f"   {x:+9.2f}   {c:9.4f}   {e:9.4f}")

# Stieltjes transform: empirical mean vs closed form, and the fixed point f = -1/(z + f)
print("\n   z          m_N(z)                f(z)                 |m + 1/(z+m)|")
for z in (2j, 1 + 1j, -0.5 + 0.5j, 0.1j):
    m = complex(np.mean(1 / (lam - z)))
    f = semicircle_stieltjes(z)
    print(f"   {z!s:9}  {m:.5f}  {f:.5f}  {self_consistency_residual(z, m):.2e}")

print(f"\nsemicircle_density(0) = {semicircle_density(0.0):.7f} = 1/pi")
