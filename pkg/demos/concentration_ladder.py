"""Concentration of the Stieltjes transform and of the Green function diagonal.

N^2 Var m_N(z) stays bounded as N grows at fixed N/M, and the diagonal
entries G_kk fluctuate around -1/(z + f_N) on the scale 1/N + N/M.
"""
from covlab import EnsembleConfig, distribution
from covlab.montecarlo import green_diag_report, variance_scaling_report

g = distribution("gaussian")
ladder = [EnsembleConfig(n, 64 * n, g, replicas=2000, sampler="wishart") for n in (16, 32, 64, 128)]
for z in (2j, 10j):
    print(f"z={z}")
    for r in variance_scaling_report(ladder, z):
        print(f"  N={r.N:4d}  N^2 Var m_N = {r.scaled_variance:.4f}  "
              f"(re {r.N ** 2 * r.var_re:.4f}, im {r.N ** 2 * r.var_im:.4f})")

print("\nE|G_kk + 1/(z + f_hat)|^2 / (1/N + N/M) at z=2i, N=64")
for M in (1024, 4096, 16384, 65536):
    r = green_diag_report(EnsembleConfig(64, M, g, replicas=500, sampler="wishart"), 2j)
    print(f"  M={M:6d}  msq={r.green_diag_msq:.3e}  ratio={r.green_ratio:.3f}")
