"""Compare the compiled and pure-Python radial shooting kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each workload is run on both backends; results must agree to the last bit
because the two kernels perform the same floating-point operations.
"""

import argparse
import time

import numpy as np

from conformal_obstruction import kernels
from conformal_obstruction.pohozaev import RadialProblem, shoot

WORKLOADS = {
    "subcritical sweep (n=3, p=4, 40 alphas, adaptive)": lambda be: [
        shoot(RadialProblem(3, 4.0, a), backend=be).first_zero for a in np.linspace(0.25, 4.0, 40)
    ],
    "critical p=6 to r=1000 (adaptive)": lambda be: [shoot(RadialProblem(3, 6.0, 1.0), backend=be).u[-1]],
    "fixed step h=1e-3 (n=3, p=4)": lambda be: [shoot(RadialProblem(3, 4.0, 1.0), step=1e-3, backend=be).first_zero],
}


def best_time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    try:
        kernels.load_backend("cython")
    except ImportError:
        print("compiled kernel not available; build with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'workload':52s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, work in WORKLOADS.items():
        tp, rp = best_time(lambda: work("python"), args.repeat)
        tc, rc = best_time(lambda: work("cython"), args.repeat)
        if rp != rc:
            raise SystemExit(f"backends disagree on {name}: {rp} vs {rc}")
        print(f"{name:52s} {tp:11.4f} {tc:11.4f} {tp / tc:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
