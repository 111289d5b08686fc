"""Timing comparison of the compiled and plain-Python kernel paths.

Run as:  python benchmarks/bench_backends.py
It re-executes itself once with WEDGE_ECHO_BACKEND=numpy to time the
fallback, then prints a side-by-side table.  The hot loops are the
classical trajectory kernels; the quantum propagation is FFT-bound
numpy either way and is shown once for scale.
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np


def time_case(fn, *args, repeat=3):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def run_cases():
    from wedge_echo import BilliardSpec, dimensionless
    from wedge_echo.classical import (
        ClassicalState,
        classical_echo,
        propagate_trajectory,
        sample_thermal_classical,
    )
    from wedge_echo.classical.backend import BACKEND_NAME

    u = dimensionless()
    hard = BilliardSpec(alpha=math.radians(52.5), units=u)
    sheet = BilliardSpec(alpha=math.radians(52.5), wall_model="gaussian_sheet",
                         wall_width=1.0, trap_depth=15.0, sheet_length=24.0,
                         units=u)
    state = ClassicalState(0.4, 5.0, 0.3, 0.1)
    sample = sample_thermal_classical(hard, 1.3, 12.0, 800, seed=5)
    sample_s = sample_thermal_classical(sheet, 1.1, 10.0, 200, seed=6)

    # warm-up (includes JIT compilation on the numba path)
    propagate_trajectory(state, hard, 50.0)
    propagate_trajectory(state, sheet, 5.0)

    results = {
        "backend": BACKEND_NAME,
        "hard-wall trajectory, 1e4 bounces": time_case(
            lambda: propagate_trajectory(state, hard, 3.2e4, max_events=30000)
        ),
        "smooth trajectory, 200 time units": time_case(
            lambda: propagate_trajectory(state, sheet, 200.0)
        ),
        "hard-wall survival, 800 members": time_case(
            lambda: classical_echo(hard, sample, np.linspace(0.0, 8.0, 9))
        ),
        "smooth survival, 200 members": time_case(
            lambda: classical_echo(sheet, sample_s, np.linspace(0.0, 4.0, 5))
        ),
    }
    return results


def quantum_case():
    from wedge_echo import PerturbationSpec, build_potential, BilliardSpec, dimensionless
    from wedge_echo.quantum import Grid2D, design_grid, discretize
    from wedge_echo.quantum.propagate import evolve_array

    u = dimensionless()
    sheet = BilliardSpec(alpha=math.radians(52.5), wall_model="gaussian_sheet",
                         wall_width=1.0, trap_depth=15.0, sheet_length=24.0,
                         units=u)
    grid, conf = design_grid(sheet, 10.5, 128, 128, pad=3.5)
    h = discretize(build_potential(sheet, PerturbationSpec(0.0), "down"), grid, conf)
    rng = np.random.default_rng(0)
    batch = rng.standard_normal((24, 128, 128)) + 0j
    return time_case(lambda: evolve_array(batch, h, 0.5, 2e-3))


def main():
    if os.environ.get("_BENCH_CHILD") == "1":
        print(json.dumps(run_cases()))
        return

    here = run_cases()
    env = dict(os.environ, WEDGE_ECHO_BACKEND="numpy", _BENCH_CHILD="1")
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__)],
        env=env, capture_output=True, text=True, check=True,
    )
    other = json.loads(out.stdout.strip().splitlines()[-1])

    fast, slow = (here, other) if here["backend"] == "numba" else (other, here)
    print(f"\n{'case':42s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    print("-" * 74)
    for key in fast:
        if key == "backend":
            continue
        a, b = fast[key], slow[key]
        print(f"{key:42s} {a:10.4f} {b:10.4f} {b / a:7.1f}x")
    tq = quantum_case()
    print("-" * 74)
    print(f"{'split-step batch (24 x 128^2, 250 steps)':42s} {tq:10.4f} "
          f"{'(numpy FFT on both paths)':>21s}")


if __name__ == "__main__":
    main()
