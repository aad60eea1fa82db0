"""Benchmark the jit-compiled kernels against the pure-numpy fallback.

The kernel module picks its implementation at import time from the
GATERACER_NUMBA environment variable, so this script re-runs itself in a
subprocess per mode and prints a comparison table.

Usage: python benchmarks/bench_kernels.py
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np


def timeit(fn, repeats=5, number=200):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(number):
            fn()
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def run_benchmarks():
    from gateracer import kernels

    kernels.warmup()
    rng = np.random.default_rng(0)

    rewards = rng.standard_normal(2048)
    values = rng.standard_normal(2048)
    dones = (rng.random(2048) < 0.01).astype(np.float64)

    obs = rng.standard_normal(21)
    batch = rng.standard_normal((256, 21))
    w1 = rng.standard_normal((21, 256)) * 0.1
    b1 = np.zeros(256)
    w2 = rng.standard_normal((256, 256)) * 0.1
    b2 = np.zeros(256)
    w3 = rng.standard_normal((256, 256)) * 0.1
    b3 = np.zeros(256)
    w4 = rng.standard_normal((256, 3)) * 0.1
    b4 = np.zeros(3)
    h1, h2, h3, out = kernels.mlp3_forward(batch, w1, b1, w2, b2, w3, b3,
                                           w4, b4)
    dout = rng.standard_normal(out.shape)

    p0 = np.array([-1.0, 0.3, 1.9])
    p1 = np.array([1.2, -0.2, 2.1])
    center = np.array([0.0, 0.0, 2.0])

    pos = np.zeros(3)
    vel = np.array([3.0, 1.0, 0.0])
    att = np.zeros(3)
    dv = np.array([0.5, -0.2, 0.1])

    cases = {
        "gae_scan T=2048": lambda: kernels.gae_scan(
            rewards, values, dones, 0.0, 0.99, 0.95),
        "mlp3_forward_1d 21->256^3": lambda: kernels.mlp3_forward_1d(
            obs, w1, b1, w2, b2, w3, b3, w4, b4),
        "mlp3_forward batch=256": lambda: kernels.mlp3_forward(
            batch, w1, b1, w2, b2, w3, b3, w4, b4),
        "mlp3_backward batch=256": lambda: kernels.mlp3_backward(
            batch, h1, h2, h3, dout, w2, w3, w4),
        "gate_crossing": lambda: kernels.gate_crossing(
            p0, p1, center, 0.3, 1.5, 1.5),
        "frame_collision": lambda: kernels.frame_collision(
            p0, p1, center, 0.3, 1.5, 1.5, 0.25, 0.3),
        "dyn_step": lambda: kernels.dyn_step(
            pos, vel, att, dv, 0.05, 0.3, 2.0, 15.0, math.pi),
    }
    return {name: timeit(fn) for name, fn in cases.items()}


def main():
    if "--child" in sys.argv:
        print(json.dumps(run_benchmarks()))
        return

    results = {}
    for mode, flag in (("numba", "1"), ("numpy", "0")):
        env = dict(os.environ, GATERACER_NUMBA=flag)
        out = subprocess.run([sys.executable, __file__, "--child"],
                             env=env, capture_output=True, text=True,
                             check=True)
        results[mode] = json.loads(out.stdout.strip().splitlines()[-1])

    width = max(len(k) for k in results["numba"]) + 2
    print(f"{'kernel':<{width}}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for name in results["numba"]:
        nb = results["numba"][name]
        np_ = results["numpy"][name]
        print(f"{name:<{width}}{nb * 1e6:>10.1f}us{np_ * 1e6:>10.1f}us"
              f"{np_ / nb:>9.1f}x")


if __name__ == "__main__":
    main()
