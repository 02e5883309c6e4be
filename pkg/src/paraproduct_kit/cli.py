"""Reproducible experiment runner.

Commands: decompose (product-split reconstruction checks), norms (closed
forms and equivalence brackets), kernel (off-diagonal decay fits), atoms
(decomposition checks), divcurl (the vector-field experiment), sweep
(boundedness ratios under grid refinement).

Every run is fully determined by the configuration and the seed; reports
echo the configuration and are byte-identical across repeated runs.  Exit
codes: 0 all checks pass, 2 usage error, 3 check failure.  The
PARAPRODUCT_KIT_THREADS variable caps trial-level parallelism (default 1);
trial results are aggregated in index order either way.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .atoms import atom_verify, finite_atomic_decompose
from .backend import BACKEND, thread_cap
from .divcurl import curl_free_field, div_curl_experiment, div_free_field, \
    riesz_apply
from .errors import RangeParameterError
from .fields import GridFunction
from .norms import (Weight, bmo_alpha_norm, carleson_norm, lipschitz_norm,
                    lp_norm, sequence_hardy_norm)
from .paraproducts import kernel_probe, renormalize, separation_probes
from .randfields import (FieldSpec, Lcg64, lipschitz_sample, random_field,
                         random_torus_function)
from .transform import analyze
from .wavelets import daubechies_system, haar_system

USAGE_EXIT = 2
CHECK_EXIT = 3

_COMMANDS = ("decompose", "norms", "kernel", "atoms", "divcurl", "sweep")


@dataclass
class ExperimentConfig:
    command: str
    wavelet: str = "haar"
    n: int = 1
    p: float = 0.95
    jmin: int = 0
    jmax: int = 4
    K: int = 10
    seed: int = 1
    trials: int = 10
    out: str | None = None
    format: str = "json"
    timings: bool = False


class UsageError(Exception):
    def __init__(self, field, message):
        super().__init__(message)
        self.field = field


def make_system(name: str, K_cascade: int = 10):
    name = name.lower()
    if name == "haar":
        return haar_system(K_cascade=K_cascade)
    if name.startswith("db"):
        try:
            order = int(name[2:])
        except ValueError:
            raise UsageError("wavelet", f"unknown wavelet {name!r}")
        try:
            return daubechies_system(order, K_cascade=K_cascade)
        except RangeParameterError as exc:
            raise UsageError("wavelet", str(exc))
    raise UsageError("wavelet", f"unknown wavelet {name!r}")


def validate(config: ExperimentConfig):
    if config.command not in _COMMANDS:
        raise UsageError("command",
                         f"command must be one of {', '.join(_COMMANDS)}")
    lo = config.n / (config.n + 1.0)
    if not lo < config.p < 1.0:
        raise UsageError(
            "p", f"p={config.p} outside (n/(n+1), 1) = ({lo:.4f}, 1) "
            f"for n={config.n}")
    if config.n < 1 or config.n > 3:
        raise UsageError("n", "dimension n must be 1, 2, or 3")
    if config.command != "kernel":
        if config.jmin >= config.jmax:
            raise UsageError("jmin", "jmin must be strictly below jmax")
        if config.K < config.jmax:
            raise UsageError("K", "K must be at least jmax")
    if config.trials < 1:
        raise UsageError("trials", "trials must be positive")
    if config.format not in ("json", "csv"):
        raise UsageError("format", "format must be json or csv")


def _map_trials(worker, count):
    cap = thread_cap()
    if cap <= 1:
        return [worker(t) for t in range(count)]
    with ThreadPoolExecutor(max_workers=cap) as pool:
        return list(pool.map(worker, range(count)))


def _check(name, value, tolerance, passed=None):
    if passed is None:
        passed = bool(value <= tolerance)
    return {"name": name, "value": float(value),
            "tolerance": float(tolerance), "passed": bool(passed)}


# ---------------------------------------------------------------------------
# command runners


def run_decompose(config: ExperimentConfig):
    system = make_system(config.wavelet)
    spec = FieldSpec(n=config.n, j_min=config.jmin, j_max=config.jmax,
                     entries=100, box=((0.0, 4.0),) * config.n)
    is_haar = config.wavelet.lower() in ("haar", "db1")

    def worker(t):
        f = random_field(config.seed + 2 * t, spec)
        g = random_field(config.seed + 2 * t + 1, spec)
        res = renormalize(f, g, system, K_out=config.K)
        scale = max(f.l2_norm() * g.l2_norm(), 1e-300)
        prod_max = max(float(np.max(np.abs(res.value.values))), 1e-300)
        cancel = max(abs(res.components[i].quadrature()) for i in range(3))
        return {
            "trial": t,
            "residual_scaled": res.reconstruction_residual / scale,
            "residual_relative": res.reconstruction_residual / prod_max,
            "cancellation_scaled": cancel / scale,
            "terms": res.term_count,
        }

    rows = _map_trials(worker, config.trials)
    worst_scaled = max(r["residual_scaled"] for r in rows)
    worst_rel = max(r["residual_relative"] for r in rows)
    worst_cancel = max(r["cancellation_scaled"] for r in rows)
    checks = [
        _check("reconstruction", worst_scaled if is_haar else worst_rel,
               1e-10 if is_haar else 1e-6),
        _check("cancellation:mean-zero-components", worst_cancel, 1e-6),
    ]
    return {"trials": rows, "checks": checks}


def run_norms(config: ExperimentConfig):
    gen = Lcg64(config.seed)
    worst_seq = 0.0
    worst_car = 0.0
    from .fields import CoeffField

    for _ in range(config.trials):
        j = config.jmin + gen.next_index(config.jmax - config.jmin)
        k = tuple(gen.next_index(4 << max(j, 0)) for _ in range(config.n))
        s = 2.0 * gen.next_unit() - 1.0
        lo_p = config.n / (config.n + 1.0)
        p = lo_p + (1.0 - lo_p) * (0.1 + 0.8 * gen.next_unit())
        lam = (1,) + (0,) * (config.n - 1)
        c = CoeffField(config.n, j, j + 1, {(j, k, lam): s}, {})
        vol = 2.0 ** (-j * config.n)
        expected = abs(s) * vol ** (1.0 / p - 0.5)
        got = sequence_hardy_norm(c, p)
        worst_seq = max(worst_seq, abs(got - expected) / expected)
        alpha = config.n * (1.0 / p - 1.0)
        expected_c = abs(s) * vol ** (-(alpha / config.n + 0.5))
        got_c = carleson_norm(c, alpha)
        worst_car = max(worst_car, abs(got_c - expected_c) / expected_c)
    checks = [
        _check("closed-form:sequence-norm", worst_seq, 1e-10),
        _check("closed-form:carleson-single", worst_car, 1e-10),
    ]
    # equivalence bracket on a sampled Hoelder family (1D)
    brackets = {}
    if config.n == 1:
        system = make_system(config.wavelet)
        alpha = 1.0 / config.p - 1.0
        ratios_c = []
        ratios_b = []
        count = min(config.trials, 30)
        for t in range(count):
            g = lipschitz_sample(Lcg64(config.seed + 100 + t), (0.0, 4.0),
                                 config.K, alpha)
            lips = lipschitz_norm(g, alpha)
            if lips <= 0:
                continue
            cg = analyze(g, system, config.jmin, config.jmax)
            ratios_c.append(carleson_norm(cg, alpha) / lips)
            ratios_b.append(bmo_alpha_norm(g, alpha) / lips)
        if ratios_c:
            brackets = {
                "carleson_over_lipschitz": [min(ratios_c), max(ratios_c)],
                "bmo_over_lipschitz": [min(ratios_b), max(ratios_b)],
            }
            checks.append(_check(
                "equivalence:carleson-bracket-width",
                max(ratios_c) / max(min(ratios_c), 1e-300), 10.0))
            checks.append(_check(
                "equivalence:bmo-bracket-width",
                max(ratios_b) / max(min(ratios_b), 1e-300), 10.0))
    return {"checks": checks, "brackets": brackets}


def run_kernel(config: ExperimentConfig):
    system = make_system(config.wavelet)
    j_lo = config.jmin if config.jmin != 0 else -6
    j_hi = config.jmax if config.jmax != 4 else 10
    seps = [2.0 ** (-e) for e in range(1, 7)]
    probes = separation_probes(seps)
    probe = kernel_probe(1, system, (j_lo, j_hi), probes)
    checks = [
        _check("kernel-decay:slope-low", probe.fitted_slope, -1.8,
               passed=probe.fitted_slope <= -1.8),
        _check("kernel-decay:slope-high", probe.fitted_slope, -2.2,
               passed=probe.fitted_slope >= -2.2),
    ]
    values = {
        "fitted_slope": probe.fitted_slope,
        "fitted_constant": probe.fitted_constant,
        "tail_estimate": probe.tail_estimate,
        "scale_range": list(probe.scale_range),
        "kernel_values": [float(v) for v in probe.values],
        "separations": [float(s) for s in probe.separations],
    }
    if system.bank.length > 2:
        values["regularity_slope"] = probe.regularity_slope
        target = -(2 * 1 + 1)
        checks.append(_check(
            "kernel-regularity:slope-band",
            abs(probe.regularity_slope - target), 0.3))
    return {"checks": checks, "values": values}


def run_atoms(config: ExperimentConfig):
    system = make_system(config.wavelet)
    spec = FieldSpec(n=config.n, j_min=config.jmin, j_max=config.jmax,
                     entries=150, box=((0.0, 4.0),) * config.n)
    dilation = max(system.support_radius, 1.0)

    def worker(t):
        f = random_field(config.seed + t, spec)
        pairs = finite_atomic_decompose(f, config.p,
                                        support_dilation=dilation)
        recon = {}
        for w, atom in pairs:
            for key, v in atom.coeffs.wavelet.items():
                recon[key] = recon.get(key, 0.0) + w * v
        err = max(abs(recon.get(key, 0.0) - v)
                  for key, v in f.wavelet.items())
        fails = sum(0 if atom_verify(atom, system)["passed"] else 1
                    for _, atom in pairs)
        mass = sum(w ** config.p for w, _ in pairs) ** (1.0 / config.p)
        ratio = mass / max(sequence_hardy_norm(f, config.p), 1e-300)
        return {"trial": t, "reconstruction_error": err,
                "verify_failures": fails, "mass_ratio": ratio,
                "atom_count": len(pairs)}

    rows = _map_trials(worker, config.trials)
    ratios = [r["mass_ratio"] for r in rows]
    checks = [
        _check("atoms:reconstruction",
               max(r["reconstruction_error"] for r in rows), 1e-12),
        _check("atoms:verify-failures",
               sum(r["verify_failures"] for r in rows), 0.5),
        _check("atoms:mass-ratio-spread", max(ratios) / min(ratios), 4.0),
    ]
    return {"trials": rows, "checks": checks}


def run_divcurl(config: ExperimentConfig):
    if config.n != 2:
        raise UsageError("n", "divcurl experiment runs in dimension 2")
    system = make_system(config.wavelet)

    def worker(t):
        gen = Lcg64(config.seed + t)
        f0 = random_torus_function(gen, config.K, 2, kmax=8, decay=1.5)
        f0 = GridFunction(f0.lo, f0.K, f0.values - f0.values.mean())
        u = random_torus_function(gen, config.K, 2, kmax=8, decay=2.0)
        F = curl_free_field(f0)
        G = div_free_field(u)
        rep = div_curl_experiment(
            F, G, config.p, system, j_min=config.jmin, j_max=config.jmax,
            lipschitz_kw={"near_cells": 16, "far_stride": 4})
        return {"trial": t, "ratio": rep["ratio"],
                "residuals": rep["residuals"], "norms": rep["norms"]}

    rows = _map_trials(worker, config.trials)
    worst_res = max(max(r["residuals"]["curl"], r["residuals"]["div"],
                        r["residuals"]["riesz_sum"]) for r in rows)
    ratios = [r["ratio"] for r in rows]
    # pointwise identities on a fixed single mode
    N = 2 ** config.K
    x = np.arange(N) / N
    cosg = GridFunction((0.0, 0.0), config.K,
                        np.outer(np.cos(2 * math.pi * x), np.ones(N)))
    hil = riesz_apply(0, cosg)
    sing = np.outer(np.sin(2 * math.pi * x), np.ones(N))
    hilbert_resid = float(np.max(np.abs(hil.values - sing)))
    gen = Lcg64(config.seed)
    probe = random_torus_function(gen, config.K, 2, kmax=6, decay=1.0)
    rr = riesz_apply(0, riesz_apply(0, probe)).values \
        + riesz_apply(1, riesz_apply(1, probe)).values
    sq_resid = float(np.max(np.abs(rr + probe.values))) \
        / max(float(np.max(np.abs(probe.values))), 1e-300)
    checks = [
        _check("divcurl:spectral-residuals", worst_res, 1e-8),
        _check("divcurl:hilbert-of-cosine", hilbert_resid, 1e-10),
        _check("divcurl:riesz-square-identity", sq_resid, 1e-10),
        _check("divcurl:ratio-spread", max(ratios) / min(ratios), 4.0),
    ]
    return {"trials": rows, "checks": checks}


def run_sweep(config: ExperimentConfig):
    if config.n != 1:
        raise UsageError("n", "the boundedness sweep runs in dimension 1")
    system = make_system(config.wavelet)
    alpha = 1.0 / config.p - 1.0
    w = Weight(1, config.p)
    spec = FieldSpec(n=1, j_min=config.jmin, j_max=config.jmax, entries=60,
                     box=((0.0, 4.0),))

    def one_resolution(f, g_seed, K_cur):
        g = lipschitz_sample(Lcg64(g_seed), (-1.0, 5.0), K_cur, alpha)
        lips = lipschitz_norm(g, alpha)
        cg = analyze(g, system, config.jmin, config.jmax)
        res = renormalize(f, cg, system, K_out=K_cur)
        T = res.cancellative_part
        S = res.diagonal_part
        cT = analyze(T, system, config.jmin, config.jmax)
        t_norm = sequence_hardy_norm(cT, config.p, weight=w) / lips
        s_norm = lp_norm(S, 1.0) / lips
        return t_norm, s_norm

    def worker(t):
        f = random_field(config.seed + 2 * t, spec)
        nf = sequence_hardy_norm(f, config.p)
        f = f.scaled(1.0 / nf)
        g_seed = config.seed + 2 * t + 1
        t0, s0 = one_resolution(f, g_seed, config.K)
        t1, s1 = one_resolution(f, g_seed, config.K + 1)
        return {"trial": t, "T_norm": t0, "S_norm": s0,
                "T_refined": t1, "S_refined": s1,
                "T_change": max(t1 / t0, t0 / t1) if t0 > 0 else 1.0,
                "S_change": max(s1 / s0, s0 / s1) if s0 > 0 else 1.0}

    rows = _map_trials(worker, config.trials)
    checks = [
        _check("sweep:T-refinement-stability",
               max(r["T_change"] for r in rows), 2.0),
        _check("sweep:S-refinement-stability",
               max(r["S_change"] for r in rows), 2.0),
        _check("sweep:finite",
               0.0 if all(np.isfinite(r["T_norm"]) and np.isfinite(r["S_norm"])
                          for r in rows) else 1.0, 0.5),
    ]
    return {"trials": rows, "checks": checks}


_RUNNERS = {
    "decompose": run_decompose,
    "norms": run_norms,
    "kernel": run_kernel,
    "atoms": run_atoms,
    "divcurl": run_divcurl,
    "sweep": run_sweep,
}


# ---------------------------------------------------------------------------
# report plumbing


def run(config: ExperimentConfig) -> dict:
    """Execute the configured experiment and assemble the report."""
    validate(config)
    t0 = time.perf_counter()
    body = _RUNNERS[config.command](config)
    elapsed = time.perf_counter() - t0
    report = {
        "config": asdict(config),
        "command": config.command,
        "library_version": __version__,
        "backend": BACKEND,
        **body,
    }
    report["passed"] = all(c["passed"] for c in body.get("checks", []))
    if config.timings:
        report["wall_clock_s"] = elapsed
    else:
        print(f"# wall clock: {elapsed:.2f}s", file=sys.stderr)
    return report


def _flatten(prefix, obj, rows):
    if isinstance(obj, dict):
        for key in sorted(obj):
            _flatten(f"{prefix}{key}." if prefix else f"{key}.",
                     obj[key], rows)
    elif isinstance(obj, (list, tuple)):
        for idx, item in enumerate(obj):
            _flatten(f"{prefix}{idx}.", item, rows)
    else:
        rows.append((prefix.rstrip("."), obj))


def format_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    rows = []
    _flatten("", report, rows)
    return "".join(f"{key},{value}\n" for key, value in rows)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="paraproduct-kit",
        description="Deterministic product-renormalization experiments")
    parser.add_argument("--command", required=True, choices=_COMMANDS)
    parser.add_argument("--wavelet", default="haar")
    parser.add_argument("--n", type=int, default=1)
    parser.add_argument("--p", type=float, default=0.95)
    parser.add_argument("--jmin", type=int, default=0)
    parser.add_argument("--jmax", type=int, default=4)
    parser.add_argument("--K", type=int, default=10)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--trials", type=int, default=10)
    parser.add_argument("--out", default=None)
    parser.add_argument("--format", default="json", choices=["json", "csv"])
    parser.add_argument("--timings", action="store_true",
                        help="include wall-clock time in the report "
                        "(breaks byte-identical reruns)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = ExperimentConfig(
        command=args.command, wavelet=args.wavelet, n=args.n, p=args.p,
        jmin=args.jmin, jmax=args.jmax, K=args.K, seed=args.seed,
        trials=args.trials, out=args.out, format=args.format,
        timings=args.timings)
    try:
        report = run(config)
    except UsageError as exc:
        print(f"error: {exc.field}: {exc}", file=sys.stderr)
        return USAGE_EXIT
    text = format_report(report, config.format)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report["passed"] else CHECK_EXIT


if __name__ == "__main__":
    sys.exit(main())
