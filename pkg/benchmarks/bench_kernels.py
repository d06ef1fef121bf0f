"""Time the lattice kernels under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--m 32] [--repeat 3]

The numpy fallback is what runs with ROUGHFRAC_NUMBA=0.  Each kernel is
called once per backend before timing so numba compilation is excluded.
"""
import argparse
import time

import numpy as np

from roughfrac import kernels
from roughfrac._accel import using_backend
from roughfrac.geometry import Grid
from roughfrac.operators import default_radii, riesz_stencil, _angular
from roughfrac.sphere import RoughKernel
from roughfrac.verification import default_family


def cases(m):
    g = Grid(2, 2.0, m)
    rng = np.random.default_rng(0)
    f = rng.standard_normal(g.shape)
    b = np.log(np.hypot(*g.coords()))
    kern = RoughKernel.tabulate(2, "sign(cos(theta))", 64)
    K = riesz_stencil(g, kern, 0.5)
    ang = _angular(g, kern, absolute=True)
    radii = default_radii(g)
    fam = default_family(g)
    C, R = fam.centers_array(), fam.radii_array()
    return {
        "stencil_sum": lambda: kernels.stencil_sum(K, f),
        "commutator_sum": lambda: kernels.commutator_sum(K, b, f),
        "ladder_sums": lambda: kernels.ladder_sums(ang, np.abs(f), radii, g.h),
        "abs_commutator_sums": lambda: kernels.abs_commutator_sums(ang, np.abs(K), b, np.abs(f), radii, g.h),
        "ball_sums": lambda: kernels.ball_sums(f.reshape(1, -1), C, R, g.half_width, g.h, g.m),
        "ball_scatter_max": lambda: kernels.ball_scatter_max(np.arange(len(R), dtype=float), C, R,
                                                             g.half_width, g.h, g.m, 2),
    }


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"m={args.m}  (best of {args.repeat})")
    print(f"{'kernel':<22}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, fn in cases(args.m).items():
        with using_backend("numba"):
            tn = best_of(fn, args.repeat)
        with using_backend("numpy"):
            tp = best_of(fn, args.repeat)
        print(f"{name:<22}{tn:>12.4f}{tp:>12.4f}{tp / tn:>10.1f}")


if __name__ == "__main__":
    main()
