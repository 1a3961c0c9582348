"""Compiled vs numpy kernels on the workloads the simulator actually runs.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best-of-N wall time for each backend,
the speedup, and the max absolute difference between the two outputs.
"""

import argparse
import time

import numpy as np

from secrecy_lab import kernels


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads(rng):
    # soft-covering at n = 12, k = 3, R = I(X;U) + 0.5: ~1670 codewords
    n, k, m = 12, 3, 1670
    sizes = [4] * k + [2] * (n - k)
    factors = np.zeros((n, m, 4))
    factors[:k] = rng.dirichlet(np.ones(4), size=(k, m))
    factors[k:, :, :2] = rng.dirichlet(np.ones(2), size=(n - k, m))
    yield "mixture_density n=12 M=1670", lambda mod: mod.mixture_density(factors, sizes)

    # encoder table for the n = 12 end-to-end run
    logf = np.log(rng.dirichlet(np.ones(2), size=(12, 13)).transpose(0, 2, 1).copy())
    yield "log_sequence_table n=12 M=13", lambda mod: mod.log_sequence_table(logf)

    # eavesdropper marginal, n = 12 with a larger codebook
    base = np.log(rng.random((2**12, 64)))
    logz = np.log(rng.dirichlet(np.ones(2), size=(12, 64)).transpose(0, 2, 1).copy())
    yield "log_marginal n=12 M=64", lambda mod: mod.log_marginal_over_codebook(base, logz)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.compiled is None:
        print("compiled extension not built; only the numpy fallback is available")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'compiled':>10s} {'numpy':>10s} {'speedup':>8s} {'max|diff|':>10s}")
    for name, run in workloads(rng):
        tc, oc = best_of(lambda: run(kernels.compiled), args.repeat)
        tf, of = best_of(lambda: run(kernels.fallback), args.repeat)
        finite = np.isfinite(oc) & np.isfinite(of)
        diff = float(np.max(np.abs(oc[finite] - of[finite]), initial=0.0))
        print(f"{name:32s} {tc:10.4f} {tf:10.4f} {tf / tc:7.1f}x {diff:10.2e}")


if __name__ == "__main__":
    main()
