"""Time the numpy and numba variants of each kernel.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The numba column excludes compilation (one warm-up call first).
"""
import argparse
import timeit

import numpy as np

from torusbif import _kernels


def cases(rng):
    for N in (64, 256, 1024):
        M = 4 * N + 2
        q = rng.normal(size=M // 2 + 1)
        yield "product_matrix", f"N={N}", (q, N, M)
    for N in (64, 512):
        a, x = rng.normal(size=N + 1), rng.uniform(0, 2 * np.pi, size=8 * N)
        yield "cosine_eval", f"N={N}, points={8 * N}", (a, x)
    for K in (1_000, 100_000):
        yield "zeta_partial", f"K={K}", (2.0, K)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = [b for b in ("numpy", "numba") if b in _kernels.IMPLEMENTATIONS]
    print(f"{'kernel':<16}{'size':<22}" + "".join(f"{b + ' [ms]':>14}" for b in backends) + f"{'speedup':>10}")
    for name, label, call_args in cases(rng):
        times = []
        for b in backends:
            fn = _kernels.IMPLEMENTATIONS[b][name]
            fn(*call_args)  # warm-up / JIT compile
            number = 3
            best = min(timeit.repeat(lambda: fn(*call_args), number=number, repeat=args.repeat)) / number
            times.append(best * 1e3)
        speed = f"{times[0] / times[1]:>9.1f}x" if len(times) == 2 else ""
        print(f"{name:<16}{label:<22}" + "".join(f"{t:>14.3f}" for t in times) + speed)


if __name__ == "__main__":
    main()
