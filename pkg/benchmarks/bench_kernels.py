#!/usr/bin/env python3
"""Benchmark the numba-compiled kernels against the pure-numpy fallback.

The kernel path is fixed at import time by the CELLWAVE_NO_NUMBA
environment flag, so this script re-runs itself in a subprocess for each
path and prints a side-by-side table.

Usage:
    python benchmarks/bench_kernels.py
"""

import json
import math
import os
import subprocess
import sys
import time

CASES = ["bessel_grid", "dispersion_grid", "mode_spectrum", "threshold"]


def run_cases():
    import numpy as np

    from cellwave import ModelParams, hill_active, linear_undercooling
    from cellwave import _kernels
    from cellwave.stability import (
        _kernel_closures,
        mode_spectrum,
        refine_threshold,
    )

    params = ModelParams(a=0.8, gamma=10.0, chi_c=1.0, chi_u=0.25, R0=1.0,
                         M=math.pi)
    f_act = hill_active(2.0, 0.75, 2)
    f_und = linear_undercooling()

    rng = np.random.default_rng(0)
    zs = (rng.uniform(-80, 20, 4000) + 1j * rng.uniform(-10, 10, 4000))
    zs = np.ascontiguousarray(zs)
    _, fun_grid, _ = _kernel_closures(1, params, f_act, f_und)

    def bench(label, fn, repeats=3):
        fn()                      # warm-up (numba compilation, caches)
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        return label, best

    results = {}
    results["bessel_grid"] = bench(
        "bessel_I on 4000 complex points",
        lambda: [_kernels.bessel_i_kernel(3, z) for z in zs],
    )
    results["dispersion_grid"] = bench(
        "mode-1 dispersion kernel on 4000 seeds", lambda: fun_grid(zs)
    )
    results["mode_spectrum"] = bench(
        "mode_spectrum m=1 (default region)",
        lambda: mode_spectrum(1, params, f_act, f_und),
    )
    results["threshold"] = bench(
        "threshold bisection to 1e-8",
        lambda: refine_threshold(params, f_act, f_und, tol=1e-8),
    )
    payload = {key: {"label": label, "seconds": secs}
               for key, (label, secs) in results.items()}
    print(json.dumps(payload))


def main():
    if "--run" in sys.argv:
        run_cases()
        return
    rows = {}
    for label, flag in [("numba", "0"), ("numpy fallback", "1")]:
        env = dict(os.environ, CELLWAVE_NO_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--run"],
            env=env, capture_output=True, text=True, check=True,
        )
        rows[label] = json.loads(out.stdout.strip().splitlines()[-1])
    print(f"{'case':44s}  {'numba':>10s}  {'fallback':>10s}  {'speedup':>8s}")
    for key in CASES:
        jit = rows["numba"][key]
        py = rows["numpy fallback"][key]
        speed = py["seconds"] / jit["seconds"]
        print(f"{jit['label']:44s}  {jit['seconds']*1e3:8.2f}ms"
              f"  {py['seconds']*1e3:8.2f}ms  {speed:7.1f}x")


if __name__ == "__main__":
    main()
