"""Compare the compiled cyclic tridiagonal kernel against the banded-solver
fallback on solver-shaped systems.

Run:  python benchmarks/bench_tridiag.py [sizes...]
"""

import sys
import time

import numpy as np

from magrelax import tridiag


def _system(m, rng):
    diag = np.full(m, 2.0) + rng.uniform(0.1, 0.5, m)
    sub = -0.5 + 0.1 * rng.standard_normal(m)
    sup = -0.5 + 0.1 * rng.standard_normal(m)
    rhs = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return sub, diag, sup, rhs


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv):
    sizes = [int(a) for a in argv] or [128, 512, 2048, 8192]
    rng = np.random.default_rng(7)
    if not tridiag.USING_COMPILED:
        print("compiled kernel unavailable; benchmarking fallback only")
    print(f"{'m':>8} {'compiled (us)':>14} {'fallback (us)':>14} {'speedup':>8}")
    for m in sizes:
        sub, diag, sup, rhs = _system(m, rng)
        repeats = max(5, 20000 // m)

        t_fb = _time(lambda: tridiag._solve_cyclic_fallback(sub, diag, sup, rhs),
                     repeats)
        if tridiag.USING_COMPILED:
            t_c = _time(lambda: tridiag.solve_cyclic(sub, diag, sup, rhs),
                        repeats)
            x_c = tridiag.solve_cyclic(sub, diag, sup, rhs)
            x_f = tridiag._solve_cyclic_fallback(sub, diag, sup, rhs)
            err = np.abs(x_c - x_f).max()
            assert err < 1e-10, f"backends disagree by {err:.2e}"
            print(f"{m:>8} {t_c * 1e6:>14.1f} {t_fb * 1e6:>14.1f} "
                  f"{t_fb / t_c:>8.2f}")
        else:
            print(f"{m:>8} {'-':>14} {t_fb * 1e6:>14.1f} {'-':>8}")


if __name__ == "__main__":
    main(sys.argv[1:])
