"""Command-line entry point.

Usage::

    covlab VERB [--n N] [--m M] [--dist NAME] [--replicas R] [--seed S]
                [--z RE,IM]... [--phi NAME]... [--t T] [--threads K]
                [--sampler entries|wishart] [--out PATH] [--format json|csv]
                [--config PATH] [--timing]

Verbs: density, transform, expansion, clt, variance-quad, scaling, verify.
Config files hold ``key = value`` lines (flag names without dashes), ``#``
starts a comment, and repeatable keys (``z``, ``phi``) may appear on
several lines.  Flags override the file.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import analytic, montecarlo
from .battery import run_checks, transcript
from .entries import distribution
from .montecarlo import EnsembleConfig
from .report import Report, emit_report

VERBS = ("density", "transform", "expansion", "clt", "variance-quad", "scaling", "verify")
DEFAULTS = {
    "n": 64, "m": 4096, "dist": "gaussian", "replicas": 2000, "seed": 42,
    "z": ["0,2"], "phi": ["x2"], "t": None, "threads": 1, "out": None,
    "format": "json", "sampler": "entries", "timing": False,
}
REPEATABLE = ("z", "phi")


class UsageError(Exception):
    pass


@dataclass
class Command:
    verb: str
    options: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser():
    p = _Parser(prog="covlab", add_help=False, allow_abbrev=False)
    p.add_argument("verb")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--dist")
    p.add_argument("--replicas", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--z", action="append")
    p.add_argument("--phi", action="append")
    p.add_argument("--t", type=float)
    p.add_argument("--threads", type=int)
    p.add_argument("--sampler", choices=("entries", "wishart"))
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--config")
    p.add_argument("--timing", action="store_const", const=True)
    return p


VALUE_FLAGS = ("--n", "--m", "--dist", "--replicas", "--seed", "--z", "--phi", "--t",
               "--threads", "--sampler", "--out", "--format", "--config")


def _bind_values(argv):
    # "--z -1,2" would otherwise read the negative value as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok in VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def parse_complex(text):
    """``"re,im"`` to a complex number in the upper half plane."""
    parts = str(text).split(",")
    if len(parts) != 2:
        raise UsageError(f"malformed complex value {text!r}; expected re,im")
    try:
        z = complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise UsageError(f"malformed complex value {text!r}") from None
    if not z.imag > 0:
        raise UsageError(f"im(z) must be positive, got {text!r}")
    return z


def format_complex(z):
    return f"{z.real!r},{z.imag!r}"


def read_config(path):
    """Parse a ``key = value`` file into a dict (lists for repeatable keys)."""
    known = set(DEFAULTS)
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        if key in REPEATABLE:
            out.setdefault(key, []).append(value)
        else:
            out[key] = value
    return out


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in ("n", "m", "replicas", "seed", "threads"):
            return int(value)
        if key == "t":
            return float(value)
        if key == "timing":
            return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
    except ValueError:
        raise UsageError(f"malformed number for {key}: {value!r}") from None
    return value


def parse_invocation(argv, config_file=None):
    """Parse ``argv`` (verb first) into a Command and an EnsembleConfig."""
    ns = vars(_build_parser().parse_args(_bind_values(argv)))
    verb = ns.pop("verb")
    if verb not in VERBS:
        raise UsageError(f"unknown verb {verb!r}; choose from {', '.join(VERBS)}")
    path = ns.pop("config") or config_file
    opts = dict(DEFAULTS)
    if path:
        opts.update(read_config(path))
    opts.update({k: v for k, v in ns.items() if v is not None})
    opts = {k: _coerce(k, v) for k, v in opts.items()}

    if opts["format"] not in ("json", "csv"):
        raise UsageError(f"unknown format {opts['format']!r}")
    N, M = opts["n"], opts["m"]
    if N < 2:
        raise UsageError("n must be at least 2")
    if M < N:
        raise UsageError(f"m must be >= n (got n={N}, m={M})")
    if opts["replicas"] < 1:
        raise UsageError("replicas must be positive")
    try:
        dist = distribution(opts["dist"])
        z_list = tuple(parse_complex(z) for z in opts["z"])
        phi_list = tuple(analytic.test_function(name) for name in opts["phi"])
        cfg = EnsembleConfig(N, M, dist, replicas=opts["replicas"], seed=opts["seed"],
                             z_list=z_list, phi_list=phi_list, sampler=opts["sampler"])
        if opts["t"] is not None:
            cfg = cfg.with_truncation(opts["t"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return Command(verb, opts), cfg


def config_text(cmd, cfg):
    """Config-file text that reproduces ``cfg`` (and the command options)."""
    lines = [f"# covlab {cmd.verb}",
             f"n = {cfg.N}", f"m = {cfg.M}", f"dist = {cfg.dist.name}",
             f"replicas = {cfg.replicas}", f"seed = {cfg.seed}", f"sampler = {cfg.sampler}"]
    lines += [f"z = {format_complex(z)}" for z in cfg.z_list]
    lines += [f"phi = {phi.name}" for phi in cfg.phi_list]
    if cfg.truncation is not None:
        lines.append(f"t = {cfg.truncation.t!r}")
    for key in ("threads", "format"):
        lines.append(f"{key} = {cmd.options.get(key, DEFAULTS[key])}")
    return "\n".join(lines) + "\n"


def _config_block(cfg):
    return {
        "n": cfg.N, "m": cfg.M, "dist": cfg.dist.name, "kappa4": cfg.dist.kappa4,
        "replicas": cfg.replicas, "seed": cfg.seed,
        "truncation_t": None if cfg.truncation is None else cfg.truncation.t,
    }


def _verdict(ok):
    return "pass" if ok else "fail"


def _density(cfg, threads):
    lam = montecarlo.collect_spectra(cfg, threads)
    edges = np.linspace(-2.5, 2.5, 41)
    width = edges[1] - edges[0]
    counts = np.stack([np.histogram(row, edges)[0] for row in lam]) / (cfg.N * width)
    y = cfg.N / cfg.M
    rows = []
    for b in range(len(edges) - 1):
        lo, hi = edges[b], edges[b + 1]
        st = montecarlo.ordered_stats(counts[:, b])
        pred = float(np.diff(analytic.semicircle_cdf([lo, hi]))[0] / width)
        sub = np.linspace(lo, hi, 41)
        # H-scale image of the MP law at the finite ratio y
        mp = float(np.mean(math.sqrt(y) * analytic.mp_density(1 + math.sqrt(y) * sub, y)))
        ok = abs(st.mean - mp) <= 0.02 + 5 * st.stderr
        rows.append({"x": float(0.5 * (lo + hi)), "predicted": pred, "estimate": st.mean,
                     "stderr": st.stderr, "residuals": [st.mean - pred],
                     "verdict": _verdict(ok), "diagnostics": {"mp_predicted": mp}})
    return rows


def _transform(cfg, threads):
    lam = montecarlo.collect_spectra(cfg, threads)
    bound = math.sqrt(cfg.N / cfg.M) + 1.0 / cfg.N
    rows = []
    for z in cfg.z_list:
        f = analytic.semicircle_stieltjes(z)
        m = np.mean(1.0 / (lam - z), axis=1)
        re, im = montecarlo.ordered_stats(m.real), montecarlo.ordered_stats(m.imag)
        f_hat = complex(re.mean, im.mean)
        rows.append({"z": z, "predicted": f, "estimate": f_hat,
                     "stderr": math.hypot(re.stderr, im.stderr), "residuals": [f_hat - f],
                     "verdict": _verdict(abs(f_hat - f) <= bound),
                     "diagnostics": {"fixed_point_residual":
                                     analytic.self_consistency_residual(z, f_hat),
                                     "bound": bound}})
    return rows


def _expansion(cfg, threads):
    lam = montecarlo.collect_spectra(cfg, threads)
    rows = []
    for z in cfg.z_list:
        rep = montecarlo.expansion_report(cfg, z, spectra=lam)
        v = rep.verdicts
        rows.append({"z": z, "predicted": rep.prediction.total, "estimate": rep.f_hat,
                     "stderr": rep.stderr, "residuals": list(rep.residuals),
                     "verdict": _verdict(all(v.values())),
                     "diagnostics": {"first_order": rep.prediction.first_order,
                                     "second_order": rep.prediction.second_order,
                                     "first_order_residual": rep.first_order_residual,
                                     "ordering": _verdict(v["ordering"]),
                                     "second_order_check": _verdict(v["second_order"])}})
    return rows


def _clt(cfg, threads):
    lam = montecarlo.collect_spectra(cfg, threads)
    rows = []
    for phi in cfg.phi_list:
        rep = montecarlo.clt_report(cfg, phi, spectra=lam)
        v = rep.verdicts
        rows.append({"phi": rep.phi, "predicted": rep.predicted_variance,
                     "estimate": rep.empirical_variance, "stderr": rep.variance_se,
                     "residuals": [rep.empirical_variance - rep.predicted_variance],
                     "verdict": _verdict(all(v.values())),
                     "diagnostics": {"mean": rep.empirical_mean, "skewness": rep.skewness,
                                     "excess_kurtosis": rep.excess_kurtosis,
                                     "ks_scaled": rep.ks_scaled,
                                     "degenerate": rep.degenerate}})
    return rows


def _variance_quad(cfg, threads):
    rows = []
    k4 = cfg.dist.kappa4
    for phi in cfg.phi_list:
        double, kurt = analytic.variance_terms(phi, k4, analytic.QuadratureSpec(200))
        fine = analytic.variance_functional(phi, k4, analytic.QuadratureSpec(400))
        diff = abs(double + kurt - fine)
        ok = diff <= 1e-8 and double >= -1e-10
        rows.append({"phi": phi.name, "predicted": double + kurt, "estimate": fine,
                     "stderr": diff, "residuals": [double + kurt - fine],
                     "verdict": _verdict(ok),
                     "diagnostics": {"double_term": double, "kurtosis_term": kurt}})
    return rows


def _scaling(cfg, threads):
    if cfg.N % 2 or cfg.M % 2 or cfg.N < 4:
        raise UsageError("scaling needs even n >= 4 and even m")
    ladder = [replace(cfg, N=cfg.N * k // 2, M=cfg.M * k // 2) for k in (1, 2, 4)]
    spectra = [montecarlo.collect_spectra(c, threads) for c in ladder]
    rows = []
    for z in cfg.z_list:
        reps = montecarlo.variance_scaling_report(ladder, z, spectra=spectra)
        scaled = [r.scaled_variance for r in reps]
        ratio = max(scaled) / min(scaled)
        diag = {f"N={r.N}": r.scaled_variance for r in reps}
        diag["check"] = "variance_ladder"
        rows.append({"z": z, "predicted": None, "estimate": ratio, "stderr": None,
                     "residuals": None,
                     "verdict": _verdict(ratio <= montecarlo.LADDER_RATIO),
                     "diagnostics": diag})
    for z in cfg.z_list:
        g = montecarlo.green_diag_report(cfg, z, threads)
        rows.append({"z": z, "predicted": None, "estimate": g.green_ratio, "stderr": None,
                     "residuals": None,
                     "verdict": _verdict(g.green_ratio <= montecarlo.GREEN_RATIO_MAX),
                     "diagnostics": {"check": "green_diagonal",
                                     "green_diag_msq": g.green_diag_msq,
                                     "normalizer": g.normalizer}})
    return rows


RUNNERS = {
    "density": _density,
    "transform": _transform,
    "expansion": _expansion,
    "clt": _clt,
    "variance-quad": _variance_quad,
    "scaling": _scaling,
}


def run_command(cmd, cfg):
    """Execute a parsed command and return its Report (``verify`` excluded)."""
    start = time.perf_counter()
    rows = RUNNERS[cmd.verb](cfg, cmd.options["threads"])
    elapsed = time.perf_counter() - start
    return Report(cmd.verb, _config_block(cfg), rows,
                  elapsed if cmd.options.get("timing") else None)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cmd, cfg = parse_invocation(argv)
        if cmd.verb == "verify":
            results = run_checks(cfg.seed)
            lines, status = transcript(results)
            print("\n".join(lines))
            if cmd.options["out"]:
                rows = [{"check": name, "verdict": _verdict(ok), "diagnostics": {"detail": detail}}
                        for name, ok, detail in results]
                emit_report(Report("verify", _config_block(cfg), rows), cmd.options["format"],
                            cmd.options["out"])
            return status
        report = run_command(cmd, cfg)
        emit_report(report, cmd.options["format"], cmd.options["out"])
        return 0 if report.passed else 1
    except (UsageError, ValueError, OSError) as exc:
        print(f"covlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
