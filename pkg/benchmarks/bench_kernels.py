"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from vekua import kernels
from vekua.acceptance import ROUNDTRIP_BOUNDS, roundtrip_parameter_sets
from vekua.fields import PairedField, random_field, solve_field


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    try:
        kernels.get_backend("cython")
    except ImportError:
        print("compiled extension not built; only the numpy fallback is available")
        return
    rng = np.random.default_rng(0)

    n, N = 105, 256
    c = 0.9 * np.exp(1j * rng.uniform(0, 6.3, (n, N)))
    A = rng.normal(size=(n, N)) + 1j * rng.normal(size=(n, N))
    Ns = 256 * 16
    t = np.linspace(0, 2 * np.pi, 2 * Ns + 1)
    F = rng.normal(size=(20, 2 * Ns + 1, 2)) + 0j
    a, b = rng.uniform(-1, 1, 20), rng.uniform(-3, 3, 20)
    rk = (1 + 0.5 * np.cos(t), 0.1 * np.sin(t), a, b, 0.5, 2.0, F, 2 * np.pi / Ns)

    params = roundtrip_parameter_sets()[0]
    f = PairedField.from_primal(random_field(params.group, ROUNDTRIP_BOUNDS, rng, 5))

    cases = {
        "scan_backward (105 x 256)": lambda be: kernels.scan_backward(c, A, be),
        "scan_forward (105 x 256)": lambda be: kernels.scan_forward(c, A, be),
        "rk4_propagate (20 systems, 4096 steps)": lambda be: kernels.rk4_propagate(*rk, backend=be),
        "solve_field (105 modes, n_t=256)": lambda be: solve_field(params, f, n_t=256, backend=be),
    }
    print(f"{'kernel':42s} {'cython [s]':>11s} {'numpy [s]':>11s} {'speedup':>8s}")
    for name, fn in cases.items():
        tc = best_of(lambda: fn("cython"), args.repeat)
        tp = best_of(lambda: fn("python"), args.repeat)
        print(f"{name:42s} {tc:11.5f} {tp:11.5f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
