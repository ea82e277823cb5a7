"""Compare the pure-numpy and compiled GRU kernels.

Times the recurrence forward and backward passes at the shapes used in
training (batch 100, 96 steps) and the one-window forecast shape (batch 1),
then one full DCGRU training step through each backend.

    python benchmarks/bench_kernels.py [--reps N]
"""

import argparse
import time

import numpy as np

from aquacast import models
from aquacast.nn import kernels
from aquacast.nn.optim import AdamState, adam_step

SHAPES = [(100, 96, 32, "train, GRU 32"), (100, 96, 1, "train, GRU 1"), (1, 96, 32, "forecast, GRU 32")]


def best_of(fn, reps):
    fn()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernel(mod, B, T, u, reps, rng):
    xw = rng.normal(size=(B, T, 3 * u))
    U = rng.normal(scale=0.3, size=(3 * u, u))
    h0 = np.zeros((B, u))
    fwd = best_of(lambda: mod.gru_forward(xw, U, h0, kernels.SIGMOID, kernels.TANH), reps)
    H, Z, R, C = mod.gru_forward(xw, U, h0, kernels.SIGMOID, kernels.TANH)
    dH = rng.normal(size=H.shape)
    bwd = best_of(lambda: mod.gru_backward(dH, U, h0, H, Z, R, C, kernels.SIGMOID, kernels.TANH), reps)
    return fwd, bwd


def bench_step(name, reps, rng):
    saved = kernels._impl
    kernels._impl = kernels.get_backend(name)
    try:
        net = models.build(models.ModelSpec("dcgru", 4), seed=0)
        X = rng.normal(size=(100, 96, 5))
        y = rng.normal(size=(100, 1))
        state = AdamState()

        def step():
            err = net.forward(X, train=True) - y
            net.backward(2.0 * err / err.size)
            adam_step(net.params, net.grads, state, 1e-4)

        return best_of(step, reps)
    finally:
        kernels._impl = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()
    backends = kernels.available_backends()
    rng = np.random.default_rng(0)
    print(f"backends: {', '.join(backends)} (active: {kernels.BACKEND})")
    print(f"{'shape':<20}{'backend':<10}{'forward ms':>12}{'backward ms':>13}")
    results = {}
    for B, T, u, label in SHAPES:
        for name in backends:
            fwd, bwd = bench_kernel(kernels.get_backend(name), B, T, u, args.reps, rng)
            results[(label, name)] = fwd + bwd
            print(f"{label:<20}{name:<10}{1e3 * fwd:12.3f}{1e3 * bwd:13.3f}")
    print()
    steps = {name: bench_step(name, args.reps, rng) for name in backends}
    for name, sec in steps.items():
        print(f"DCGRU training step (batch 100), {name}: {1e3 * sec:.2f} ms")
    if "compiled" in steps:
        print(f"speed-up of compiled training step: {steps['python'] / steps['compiled']:.2f}x")
        for label in (s[3] for s in SHAPES):
            ratio = results[(label, "python")] / results[(label, "compiled")]
            print(f"speed-up of compiled kernels, {label}: {ratio:.2f}x")


if __name__ == "__main__":
    main()
