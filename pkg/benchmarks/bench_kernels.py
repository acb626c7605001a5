"""Compare the compiled and numpy time-stepping kernels.

    python3 benchmarks/bench_kernels.py [--cells 128 512 2048] [--steps 2000]

Prints steps per second for each backend and grid size, and the largest
difference between the two final states.
"""

import argparse
import timeit

import numpy as np

from adhesion_wave import kernels


def _data(n):
    x = np.linspace(0.0, 1.0, n + 1)
    return 0.8 * np.cos(np.pi * x), np.zeros_like(x)


def bench(backend, cells, steps, repeat=3):
    advance = kernels.get_advance(backend)
    dx = 1.0 / cells
    u0, v0 = _data(cells)

    def run():
        u, v = u0.copy(), v0.copy()
        advance(u, v, dx, dx / 4, steps, 1.0, 2.0, kernels.FORCE_NONLINEAR)
        return u

    best = min(timeit.repeat(run, number=1, repeat=repeat))
    return steps / best, run()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, nargs="+", default=[128, 512, 2048])
    ap.add_argument("--steps", type=int, default=2000)
    args = ap.parse_args(argv)

    backends = ["python"] + (["compiled"] if kernels.compiled_available() else [])
    print(f"{'cells':>7} " + " ".join(f"{b + ' steps/s':>18}" for b in backends) + f" {'speedup':>8} {'max diff':>10}")
    for cells in args.cells:
        rates = {}
        finals = {}
        for b in backends:
            rates[b], finals[b] = bench(b, cells, args.steps)
        line = f"{cells:>7} " + " ".join(f"{rates[b]:>18.0f}" for b in backends)
        if "compiled" in rates:
            diff = float(np.max(np.abs(finals["compiled"] - finals["python"])))
            line += f" {rates['compiled'] / rates['python']:>8.1f} {diff:>10.1e}"
        print(line)
    if "compiled" not in backends:
        print("compiled kernel not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
