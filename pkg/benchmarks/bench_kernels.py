#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the numpy fallback.

Times the three hot kernels on workloads representative of the acceptance
suite, checks that both backends agree numerically, and reports speedups.

Run:  python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from bsrelay._kernels import get_backend


def timeit(fn, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_marcum(backend, calls):
    def run():
        for order, a, b in calls:
            backend.marcum_q(order, a, b)
    return run


def bench_bessel(backend, calls):
    def run():
        for order, x in calls:
            backend.log_bessel_i(order, x)
    return run


def bench_frames(backend, args):
    def run():
        backend.frame_powers(*args)
    return run


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    reference = get_backend("reference")
    try:
        compiled = get_backend("compiled")
    except ImportError:
        print("compiled kernels not built; nothing to compare")
        return 1

    rng = np.random.default_rng(0)

    # Marcum Q at outage-sweep scale: large noncentrality, mid-tail argument
    marcum_calls = []
    for _ in range(200):
        lam = float(10 ** rng.uniform(1.0, 5.0))
        x = (50 + lam) * float(rng.uniform(0.6, 1.4))
        marcum_calls.append((25, math.sqrt(lam), math.sqrt(x)))

    # log Bessel across the series and asymptotic branches
    bessel_calls = [(24, float(x)) for x in np.geomspace(1.0, 3e5, 300)]

    # Monte Carlo frame powers at the fig2 per-iteration volume
    bases = np.array([0.0 + 0.0j, 3e-6 + 1e-6j])
    coefs = np.array([[2e-6 + 0j, 1e-7, 7e-8], [2e-6 + 0j, 1e-7, 7e-8]])
    bits = rng.integers(0, 2, 1000).astype(np.uint8)
    normals = rng.standard_normal((1000, 25, 6))
    frame_args = (bases, bits, coefs, normals)

    # numerical agreement before timing
    worst_q = max(abs(reference.marcum_q(*c) - compiled.marcum_q(*c))
                  for c in marcum_calls)
    worst_b = max(abs(reference.log_bessel_i(*c) - compiled.log_bessel_i(*c))
                  for c in bessel_calls)
    worst_f = float(np.max(np.abs(reference.frame_powers(*frame_args)
                                  - compiled.frame_powers(*frame_args))))
    print(f"backend agreement: marcum {worst_q:.2e}, "
          f"log_bessel {worst_b:.2e}, frame_powers {worst_f:.2e}")

    rows = []
    for name, make in (("marcum_q x200", bench_marcum),
                       ("log_bessel_i x300", bench_bessel)):
        calls = marcum_calls if name.startswith("marcum") else bessel_calls
        t_ref = timeit(make(reference, calls), args.repeat)
        t_cmp = timeit(make(compiled, calls), args.repeat)
        rows.append((name, t_ref, t_cmp))
    t_ref = timeit(bench_frames(reference, frame_args), args.repeat)
    t_cmp = timeit(bench_frames(compiled, frame_args), args.repeat)
    rows.append(("frame_powers 1000x25x3", t_ref, t_cmp))

    print(f"{'kernel':<24}{'reference':>12}{'compiled':>12}{'speedup':>9}")
    for name, t_ref, t_cmp in rows:
        print(f"{name:<24}{1e3 * t_ref:>10.2f}ms{1e3 * t_cmp:>10.2f}ms"
              f"{t_ref / t_cmp:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
