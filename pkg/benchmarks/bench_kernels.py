"""Compare the compiled and pure-Python Newton kernels.

    python benchmarks/bench_kernels.py [--repeat N] [--sizes 13,89,233,610]
"""

import argparse
import time

import numpy as np

from peierls import kernels, make_fk, make_twist
from peierls.diophantine import GOLDEN_MEAN, convergents


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def run(pot, p, q, fixed0, backend):
    v0 = np.arange(p) * q / p + 0.05 * np.sin(np.arange(p))
    return kernels.newton_minimize(pot, v0, p, q, fixed0=fixed0, backend=backend)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", default="13,89,233,610")
    args = ap.parse_args()
    if not kernels.COMPILED_AVAILABLE:
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation`")
    sizes = {int(s) for s in args.sizes.split(",")}
    rats = [c.rational for c in convergents(GOLDEN_MEAN, 20) if c.p in sizes]
    models = {"fk lambda=4": make_fk([1.0], [4.0]), "twist K=2": make_twist(2.0),
              "fk r=2": make_fk([1.0, 0.5], [3.0])}
    print(f"{'model':<12} {'q/p':>9} {'mode':>11} {'python ms':>10} {'compiled ms':>12} "
          f"{'speedup':>8} {'max |dv|':>9}")
    for name, pot in models.items():
        for r in rats:
            for fixed0 in (False, True):
                a = run(pot, r.p, r.q, fixed0, "python")
                b = run(pot, r.p, r.q, fixed0, "compiled")
                tp = best_time(lambda: run(pot, r.p, r.q, fixed0, "python"), args.repeat)
                tc = best_time(lambda: run(pot, r.p, r.q, fixed0, "compiled"), args.repeat)
                mode = "pinned" if fixed0 else "free"
                print(f"{name:<12} {str(r):>9} {mode:>11} {1e3 * tp:10.3f} {1e3 * tc:12.3f} "
                      f"{tp / tc:8.1f} {np.max(np.abs(a[0] - b[0])):9.1e}")

    print()
    print("full barrier profile, twist K=2 at 233/144, grid 128, one thread")
    from peierls import Rational, barrier, solver
    for backend in ("python", "compiled"):
        kernels.set_backend(backend)
        barrier.clear_cache()
        solver.clear_cache()
        t = time.perf_counter()
        barrier.barrier_profile(models["twist K=2"], Rational(144, 233), 128, threads=1)
        print(f"  {backend:<9} {time.perf_counter() - t:7.2f} s")


if __name__ == "__main__":
    main()
