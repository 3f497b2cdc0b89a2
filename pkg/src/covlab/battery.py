"""Fast deterministic battery of closed-form and matrix-identity checks."""
from __future__ import annotations

import math

import numpy as np

from . import analytic, entries, matrixlab
from .analytic import QuadratureSpec, test_function
from .stats import RunningStats, merge_stats

__all__ = ["verify_battery", "run_checks", "transcript", "upper_half_plane_grid"]


def upper_half_plane_grid(n=100):
    """``n`` points with real parts in [-3, 3] and imaginary parts in [1e-2, 1e2]."""
    k = np.arange(n)
    im = np.logspace(-2, 2, n)
    re = -3.0 + 6.0 * ((k * 37) % n) / (n - 1)
    return re + 1j * im


def _branch_law(stieltjes):
    fs = np.array([stieltjes(z) for z in upper_half_plane_grid()])
    ok = bool(np.all(fs.imag > 0) and np.all(np.abs(fs) < 1))
    return ok, f"min Im f = {fs.imag.min():.3e}, max |f| = {np.abs(fs).max():.6f}"


def _quadratic_residual(stieltjes):
    zs = upper_half_plane_grid()
    res = max(abs(stieltjes(z) ** 2 + z * stieltjes(z) + 1) for z in zs)
    return res <= 1e-12, f"max |f^2 + z f + 1| = {res:.3e}"


def _fixed_point(stieltjes):
    zs = upper_half_plane_grid()
    res = max(analytic.self_consistency_residual(z, stieltjes(z)) for z in zs)
    return res <= 1e-12, f"max |f + 1/(z+f)| = {res:.3e}"


def _density_mass(_):
    errs = [abs(analytic.semicircle_mass() - 1)]
    errs += [abs(analytic.mp_mass(y) - 1) for y in (0.25, 0.5, 1.0)]
    return max(errs) <= 1e-10, f"max |mass - 1| = {max(errs):.3e}"


def _density_transform(stieltjes):
    x = np.linspace(-1.9, 1.9, 381)
    gap = max(abs(stieltjes(complex(t, 1e-4)).imag / math.pi - analytic.semicircle_density(t))
              for t in x)
    return gap <= 1e-3, f"sup gap at eta=1e-4: {gap:.3e}"


def _variance_functional(_):
    errs = []
    for k4 in (0.0, -2.0, -1.2):
        errs.append(abs(analytic.variance_functional(test_function("x"), k4) - (2 + k4)))
        errs.append(abs(analytic.variance_functional(test_function("x2"), k4) - 4))
    return max(errs) <= 1e-6, f"max |V - exact| = {max(errs):.3e}"


def _quadrature_symmetry(_):
    phi = test_function("cos")
    a, _k = analytic.variance_terms(phi, 0.0, QuadratureSpec(64))
    b, _k = analytic.variance_terms(phi, 0.0, QuadratureSpec(64), transpose=True)
    return abs(a - b) <= 1e-12, f"|swap difference| = {abs(a - b):.3e}"


def _trace_identities(rng):
    worst = 0.0
    for _ in range(50):
        N = int(rng.integers(2, 65))
        M = int(rng.integers(N, 4 * N + 1))
        Y = matrixlab.scale_data(rng.standard_normal((M, N)))
        H = matrixlab.build_H(Y)
        lam = matrixlab.eigenvalues_sym(H).eigenvalues
        t1 = abs(lam.sum() - np.trace(H)) / max(1.0, abs(np.trace(H)))
        fro = np.sum(H * H)
        t2 = abs(np.sum(lam ** 2) - fro) / fro
        worst = max(worst, t1, t2)
    return worst <= 1e-8, f"max relative trace error = {worst:.3e}"


def _resolvent_bounds(rng):
    worst_sym, worst_bound = 0.0, -math.inf
    for _ in range(20):
        Y = matrixlab.scale_data(rng.standard_normal((24, 8)))
        for z in (2j, 0.5 + 0.1j):
            G = matrixlab.resolvent(matrixlab.build_H(Y), z).entries
            worst_sym = max(worst_sym, float(np.max(np.abs(G - G.T))))
            worst_bound = max(worst_bound, float(np.max(np.abs(G))) - 1 / z.imag)
    ok = worst_sym <= 1e-10 and worst_bound <= 1e-8
    return ok, f"max |G - G^T| = {worst_sym:.3e}, max |G_jk| - 1/eta = {worst_bound:.3e}"


def _derivative_identities(rng):
    worst = 0.0
    for _ in range(20):
        M = int(rng.integers(3, 9))
        N = int(rng.integers(2, M + 1))
        Y = matrixlab.scale_data(rng.standard_normal((M, N)))
        j, k = int(rng.integers(M)), int(rng.integers(N))
        worst = max(worst, matrixlab.resolvent_derivative_check(Y, j, k, 2j, 1e-6))
    return worst <= 1e-5, f"max finite-difference deviation = {worst:.3e}"


def _interlacing(rng):
    fails = 0
    for _ in range(100):
        Y = matrixlab.scale_data(rng.standard_normal((8, 4)))
        fails += sum(not matrixlab.interlacing_check(Y, c, 1e-9) for c in range(4))
    return fails == 0, f"{fails} violations over 100 instances x 4 dropped columns"


def _stein_gaussian(rng):
    resid, se = entries.stein_expansion_residual(
        entries.distribution("gaussian"), rng, p=1, mc_size=10 ** 6, return_se=True)
    return resid <= 5 * se, f"residual = {resid:.3e}, 5 SE = {5 * se:.3e}"


def _cumulant_roundtrip(rng):
    worst = 0.0
    for _ in range(100):
        k = rng.uniform(-2, 2, 4)
        back = entries.cumulants_from_moments(*entries.moments_from_cumulants(*k))
        worst = max(worst, float(np.max(np.abs(np.array(back) - k))))
    return worst <= 1e-10, f"max round-trip error = {worst:.3e}"


def _recenter(rng):
    worst = 0.0
    for _ in range(20):
        v = rng.standard_normal(int(rng.integers(1, 500))) * 3
        out = entries.truncate_recenter(v, 2.0)
        worst = max(worst, abs(out.mean()) / max(1.0, np.abs(out).max()))
    return worst <= 1e-12, f"max scaled |mean| = {worst:.3e}"


def _stats_merge(rng):
    x = rng.standard_normal(1000) * 2 + 1
    parts = np.split(x, [137, 500, 731])
    s = [RunningStats.from_array(p) for p in parts]
    left = merge_stats(merge_stats(merge_stats(s[0], s[1]), s[2]), s[3])
    right = merge_stats(s[0], merge_stats(s[1], merge_stats(s[2], s[3])))
    full = RunningStats.from_array(x)
    worst = 0.0
    for attr in ("mean", "m2", "m3", "m4"):
        ref = max(abs(getattr(full, attr)), 1.0)
        worst = max(worst, abs(getattr(left, attr) - getattr(full, attr)) / ref,
                    abs(getattr(right, attr) - getattr(full, attr)) / ref)
    return worst <= 1e-12, f"max relative merge error = {worst:.3e}"


CHECKS = (
    ("branch law", _branch_law, "f"),
    ("quadratic residual", _quadratic_residual, "f"),
    ("fixed point", _fixed_point, "f"),
    ("density normalization", _density_mass, "f"),
    ("stieltjes-density consistency", _density_transform, "f"),
    ("variance functional", _variance_functional, "f"),
    ("quadrature symmetry", _quadrature_symmetry, "f"),
    ("trace identities", _trace_identities, "rng"),
    ("resolvent symmetry and bound", _resolvent_bounds, "rng"),
    ("resolvent derivatives", _derivative_identities, "rng"),
    ("interlacing", _interlacing, "rng"),
    ("gaussian stein identity", _stein_gaussian, "rng"),
    ("cumulant round trip", _cumulant_roundtrip, "rng"),
    ("truncate-recenter mean", _recenter, "rng"),
    ("stats merge associativity", _stats_merge, "rng"),
)


def run_checks(seed=42, stieltjes=None):
    """Run every check; returns a list of ``(name, passed, detail)``."""
    stieltjes = stieltjes or analytic.semicircle_stieltjes
    out = []
    for i, (name, fn, arg) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, i])
        try:
            ok, detail = fn(stieltjes if arg == "f" else rng)
        except (ValueError, ArithmeticError) as exc:
            ok, detail = False, f"error: {exc}"
        out.append((name, bool(ok), detail))
    return out


def transcript(results):
    """Report lines for ``run_checks`` output and the matching exit status."""
    lines = [f"{'PASS' if ok else 'FAIL'}  {name}: {detail}" for name, ok, detail in results]
    failed = [name for name, ok, _ in results if not ok]
    if failed:
        lines.append(f"FAILED: {', '.join(failed)}")
        return lines, 1
    lines.append(f"all {len(results)} checks passed")
    return lines, 0


def verify_battery(seed=42, stieltjes=None, echo=print):
    """Print one line per check; return 0 if all pass, else 1."""
    lines, status = transcript(run_checks(seed, stieltjes))
    for line in lines:
        echo(line)
    return status
