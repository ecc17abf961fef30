"""Compare the compiled kernel backend against the pure-Python twin.

Run as a script; prints one table row per kernel with both timings and the
speedup factor.  Falls back gracefully (and says so) when the compiled
extension is unavailable.
"""

import time

import numpy as np

from odeident._kernels import _py

try:
    from odeident._kernels import _cy
except ImportError:
    _cy = None


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    rng = np.random.default_rng(20240817)

    mats4 = rng.standard_normal((2001, 4, 4))
    sym5 = rng.standard_normal((5, 5))
    sym5 = 0.5 * (sym5 + sym5.T)
    tall = rng.standard_normal((400, 5, 3))
    a = rng.standard_normal((6, 6)) + 6.0 * np.eye(6)
    b = rng.standard_normal(6)

    cases = [
        ("det_many 2001x4x4", "det_many", (mats4,)),
        ("sym_eigenvalues 5x5", "sym_eigenvalues", (sym5,)),
        ("mininorm_many 400x5x3", "mininorm_many", (tall,)),
        ("solve 6x6", "solve", (a, b)),
        ("adjugate 5x5", "adjugate", (a[:5, :5],)),
    ]

    if _cy is None:
        print("compiled backend not built; timing pure-python only")

    header = f"{'kernel':26s} {'pure (ms)':>12s} {'compiled (ms)':>14s} {'speedup':>9s}"
    print(header)
    print("-" * len(header))
    for label, name, args in cases:
        t_py = _time(getattr(_py, name), *args)
        if _cy is not None:
            t_cy = _time(getattr(_cy, name), *args)
            ratio = t_py / t_cy if t_cy > 0 else float("inf")
            print(f"{label:26s} {1e3 * t_py:12.3f} {1e3 * t_cy:14.3f} "
                  f"{ratio:8.1f}x")
        else:
            print(f"{label:26s} {1e3 * t_py:12.3f} {'-':>14s} {'-':>9s}")

    # agreement spot check on the batched determinant
    d_py = _py.det_many(mats4)
    if _cy is not None:
        d_cy = _cy.det_many(mats4)
        err = float(np.max(np.abs(d_py - d_cy)))
        print(f"\nmax |det_many| backend difference: {err:.3e}")


if __name__ == "__main__":
    main()
