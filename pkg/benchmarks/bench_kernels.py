"""Time the numba kernels against the numpy fallback on identical inputs.

    python3 benchmarks/bench_kernels.py [--starts 64] [--steps 20000] [--repeat 3]

Each kernel runs once per backend to warm up (numba compiles or loads its
cache), then ``--repeat`` timed runs; the best time is reported together with
the largest absolute difference between the two backends' outputs.
"""

import argparse
import time

import numpy as np

from skewlab import kernels
from skewlab.ergodicity import pack_observables, sample_points, standard_observables
from skewlab.fourier import CircleFunction
from skewlab.system import build_system
from skewlab.unstable import canonical_prefixes, depth_for


def best_of(fn, repeat: int) -> tuple[float, object]:
    out = fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(starts: int, steps: int):
    system = build_system(2, CircleFunction.sin(1, 0.5),
                          {"q": CircleFunction.sin(1, 1 / (2 * np.pi)),
                           "r": CircleFunction.sin(1, 1 / (2 * np.pi)), "eps": 0.01})
    args = system.kernel_args()
    packed = pack_observables(standard_observables())
    one = pack_observables(standard_observables()[2:3])
    x0, y0 = sample_points(7, starts)
    xs, ys = sample_points(8, starts * 64)
    grid = np.arange(256) / 256
    prefixes = canonical_prefixes(2, 6)
    lengths = np.full(len(prefixes), 6, dtype=np.int64)
    dphi = system.phi.derivative().half()
    N = depth_for(2)
    return {
        "time_averages": lambda k: k.time_averages(x0, y0, steps, *args, *packed, len(standard_observables())),
        "correlation_sums": lambda k: k.correlation_sums(xs, ys, 20, *args, *one, *one),
        "series_table": lambda k: k.series_table(grid, prefixes, lengths, N, np.int64(2), dphi),
    }


def _max_diff(a, b) -> float:
    if isinstance(a, tuple):
        return max(_max_diff(u, v) for u, v in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--starts", type=int, default=64)
    parser.add_argument("--steps", type=int, default=20_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}; starts={args.starts} steps={args.steps}")
    print(f"{'kernel':<18} " + " ".join(f"{b:>12}" for b in backends) + f" {'speedup':>9} {'max diff':>10}")
    prev = kernels.backend_name()
    try:
        for name, fn in cases(args.starts, args.steps).items():
            times, outs = {}, {}
            for b in backends:
                kernels.use_backend(b)
                times[b], outs[b] = best_of(lambda: fn(kernels.get()), args.repeat)
            speed = times["numpy"] / times["numba"] if "numba" in times else float("nan")
            diff = _max_diff(outs["numpy"], outs.get("numba", outs["numpy"]))
            print(f"{name:<18} " + " ".join(f"{times[b]:>11.4f}s" for b in backends)
                  + f" {speed:>8.1f}x {diff:>10.2e}")
    finally:
        kernels.use_backend(prev)


if __name__ == "__main__":
    main()
