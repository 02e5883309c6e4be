"""Timing comparison of the compiled kernels against the numpy fallback.

Run as:  python benchmarks/bench_backends.py

Covers the three hot paths: windowed multiply-add accumulation (the
paraproduct inner loop), the two-channel filter steps (the transform inner
loop), and an end-to-end product split.  Backends are forced per process
via PARAPRODUCT_KIT_BACKEND, so the end-to-end row runs in subprocesses.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def time_call(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels():
    from paraproduct_kit import _kernels_py

    try:
        from paraproduct_kit import _kernels_cy
    except ImportError:
        _kernels_cy = None

    rng = np.random.default_rng(0)
    rows = []

    out = np.zeros(1 << 18)
    w = rng.normal(size=4096)

    def axpy_many(mod):
        for start in range(0, out.size - w.size, w.size // 2):
            mod.axpy_window_1d(out, start, 1.000001, w)

    rows.append(("axpy_window_1d x127 (4k window)",
                 time_call(axpy_many, _kernels_py),
                 time_call(axpy_many, _kernels_cy) if _kernels_cy else None))

    out2 = np.zeros((1024, 1024))
    w0 = rng.normal(size=96)
    w1 = rng.normal(size=96)

    def axpy2_many(mod):
        for s in range(0, 900, 30):
            mod.axpy_window_2d(out2, s, s, 0.999, w0, w1)

    rows.append(("axpy_window_2d x30 (96x96 window)",
                 time_call(axpy2_many, _kernels_py),
                 time_call(axpy2_many, _kernels_cy) if _kernels_cy else None))

    xp = np.ascontiguousarray(rng.normal(size=(256, 2048)))
    taps = np.ascontiguousarray(rng.normal(size=8))

    rows.append(("down_batch (256x2048, 8 taps)",
                 time_call(lambda m: m.down_batch(xp, taps, 1020),
                           _kernels_py),
                 time_call(lambda m: m.down_batch(xp, taps, 1020),
                           _kernels_cy) if _kernels_cy else None))

    c = np.ascontiguousarray(rng.normal(size=(256, 1024)))
    rows.append(("up_batch (256x1024, 8 taps)",
                 time_call(lambda m: m.up_batch(c, taps), _kernels_py),
                 time_call(lambda m: m.up_batch(c, taps), _kernels_cy)
                 if _kernels_cy else None))
    return rows


_E2E_SNIPPET = """
import json, time
from paraproduct_kit import renormalize, daubechies_system, BACKEND
from paraproduct_kit.randfields import FieldSpec, random_field

system = daubechies_system(3)
spec = FieldSpec(n=1, j_min=0, j_max=5, entries=100, box=((0.0, 4.0),))
pairs = [(random_field(2 * t, spec), random_field(2 * t + 1, spec))
         for t in range(6)]
best = float("inf")
for _ in range(3):
    t0 = time.perf_counter()
    for f, g in pairs:
        renormalize(f, g, system, K_out=11)
    best = min(best, time.perf_counter() - t0)
print(json.dumps({"backend": BACKEND, "seconds": best}))
"""


def bench_end_to_end():
    rows = {}
    for backend in ("py", "cy"):
        env = dict(os.environ, PARAPRODUCT_KIT_BACKEND=backend)
        proc = subprocess.run([sys.executable, "-c", _E2E_SNIPPET], env=env,
                              capture_output=True, text=True)
        if proc.returncode != 0:
            rows[backend] = None
            continue
        data = json.loads(proc.stdout.strip().splitlines()[-1])
        rows[data["backend"]] = data["seconds"]
    return rows


def main():
    print(f"{'kernel':42s} {'numpy':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, t_py, t_cy in bench_kernels():
        if t_cy is None:
            print(f"{name:42s} {t_py * 1e3:9.2f}ms {'n/a':>10s}")
        else:
            print(f"{name:42s} {t_py * 1e3:9.2f}ms {t_cy * 1e3:9.2f}ms "
                  f"{t_py / t_cy:7.2f}x")
    e2e = bench_end_to_end()
    t_py = e2e.get("python")
    t_cy = e2e.get("compiled")
    if t_py and t_cy:
        print(f"{'renormalize db3, 6 pairs, K=11':42s} {t_py * 1e3:9.2f}ms "
              f"{t_cy * 1e3:9.2f}ms {t_py / t_cy:7.2f}x")
    elif t_py:
        print(f"{'renormalize db3, 6 pairs, K=11':42s} {t_py * 1e3:9.2f}ms "
              f"{'n/a':>10s}")


if __name__ == "__main__":
    main()
