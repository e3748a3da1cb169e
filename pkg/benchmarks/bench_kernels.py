"""Time the RK4 propagation kernel on both backends.

    python benchmarks/bench_kernels.py [--steps 20000] [--repeat 5]

Prints microseconds per step for the numba and numpy paths on the canonical
chain at D=1 plus the max deviation between their final states.
"""
import argparse
import time

import numpy as np

from qkick import kernels
from qkick.evolution import Generator
from qkick.spin_chain import canonical_config


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, default=20000)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()

    tables = Generator(canonical_config(1.0)).tables
    rho = np.zeros((8, 8), dtype=complex)
    rho[7, 7] = 1.0
    results = {}
    backends = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    for backend in backends:
        # numpy is ~50x slower; fewer steps keep the run short
        steps = args.steps if backend == "numba" else max(args.steps // 20, 1)
        kernels.rk4(rho, 10, 0.01, tables, backend)  # warm-up / JIT compile
        t, (out, _) = best_of(lambda: kernels.rk4(rho, steps, 0.01, tables, backend), args.repeat)
        results[backend] = (t / steps * 1e6, steps)
        print(f"{backend:>6}: {t / steps * 1e6:8.2f} us/step  ({steps} steps, best of {args.repeat})")
    if len(results) == 2:
        n = max(args.steps // 20, 1)
        a, _ = kernels.rk4(rho, n, 0.01, tables, "numba")
        b, _ = kernels.rk4(rho, n, 0.01, tables, "numpy")
        print(f"speedup: {results['numpy'][0] / results['numba'][0]:.1f}x, "
              f"max |numba - numpy| after {n} steps: {np.max(np.abs(a - b)):.1e}")
    else:
        print("numba unavailable or disabled (QKICK_DISABLE_NUMBA); numpy path only")


if __name__ == "__main__":
    main()
