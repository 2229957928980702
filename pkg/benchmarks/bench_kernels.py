"""Compare the compiled and pure-Python kernel backends.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each row
reports the best-of-N wall time for both backends on the same input and
checks that they return the same value.
"""
import argparse
import math
import timeit

import numpy as np

from sparse_recover import kernels


def gram(m, d, seed):
    U = np.random.default_rng(seed).standard_normal((m, d)) / math.sqrt(m)
    return np.ascontiguousarray(U.T @ U)


def cases():
    v = np.random.default_rng(0).standard_normal(100_000)
    yield "soft_threshold n=1e5", "soft_threshold", (v, 0.5)
    for m, d, s in ((14, 18, 2), (14, 18, 4), (14, 18, 6), (30, 24, 4)):
        yield f"max_deviation_all d={d} s={s}", "max_deviation_all", (gram(m, d, 1), s)
    for m, d, s in ((14, 18, 2), (14, 18, 3), (20, 16, 4)):
        yield f"max_cross_all d={d} s={s}", "max_cross_all", (gram(m, d, 2), s)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    if kernels.compiled is None:
        print("compiled extension not built; only the pure backend is available")
    print(f"{'case':34s} {'pure [s]':>10s} {'compiled [s]':>13s} {'speedup':>8s}  agree")
    for name, fn, call_args in cases():
        pure_fn = getattr(kernels.pure, fn)
        t_pure = min(timeit.repeat(lambda: pure_fn(*call_args), number=1, repeat=args.repeat))
        if kernels.compiled is None:
            print(f"{name:34s} {t_pure:10.4f}")
            continue
        comp_fn = getattr(kernels.compiled, fn)
        t_comp = min(timeit.repeat(lambda: comp_fn(*call_args), number=1, repeat=args.repeat))
        a, b = pure_fn(*call_args), comp_fn(*call_args)
        a = a[0] if isinstance(a, tuple) else a
        b = b[0] if isinstance(b, tuple) else b
        agree = np.allclose(a, b, rtol=1e-12, atol=1e-12)
        print(f"{name:34s} {t_pure:10.4f} {t_comp:13.4f} {t_pure / t_comp:7.1f}x  {agree}")


if __name__ == "__main__":
    main()
