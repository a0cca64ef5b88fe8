"""Time the numba kernels against the numpy fallback on the a=(2,2,8,96) data.

Both backends must return identical results; the script exits non-zero if
they ever differ. Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import random
import statistics
import sys
import time

import numpy as np

from balanced_sets import kernels
from balanced_sets._accel import HAVE_NUMBA
from balanced_sets.construction import ConstructionPlan, build_balanced_system, elementary_pieces
from balanced_sets.contraction import random_weak_contraction, representatives
from balanced_sets.gauge import derive_gauge
from balanced_sets.numerics import common_denominator


def level_arrays(system, n):
    ivs = sorted((iv for _, iv in elementary_pieces(system, n)), key=lambda iv: iv.lo)
    den = common_denominator([iv.lo for iv in ivs] + [iv.hi for iv in ivs] + [system.b(n)])
    lo = kernels.as_array(kernels.scale_values((iv.lo for iv in ivs), den))
    hi = kernels.as_array(kernels.scale_values((iv.hi for iv in ivs), den))
    return den, lo, hi


def cases(system):
    h = derive_gauge(system)
    den, lo, hi = level_arrays(system, 4)
    threshold = int(2 * system.b(4) * den)
    g = h.scaled(den)

    fmap = random_weak_contraction(random.Random(0), representatives(system))
    mden = common_denominator(fmap.xs + fmap.images)
    x = kernels.as_array(kernels.scale_values(fmap.xs, mden))
    fx = kernels.as_array(kernels.scale_values(fmap.images, mden))

    yield "pair_scan (3072 pieces)", lambda b: tuple(kernels.pair_scan(lo, hi, threshold, b))
    yield "run_cover (3072 pieces)", lambda b: _cover_key(kernels.run_cover(lo, hi, g, b))
    yield "expansive pair (3072 samples)", lambda b: kernels.first_expansive_pair(x, fx, b)


def _cover_key(res):
    return (tuple(int(v) for v in res.dp), tuple(int(v) for v in res.back), res.fail_j, res.fail_i)


def timed(fn, repeat):
    runs = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        runs.append(time.perf_counter() - t)
    return out, statistics.median(runs)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not importable; nothing to compare", file=sys.stderr)
        return 2

    system = build_balanced_system(ConstructionPlan((2, 2, 8, 96)))
    print(f"{'kernel':32} {'numba s':>10} {'numpy s':>10} {'speedup':>8}  match")
    mismatch = False
    for name, fn in cases(system):
        fn("numba")  # compile outside the timed region
        nb, t_nb = timed(lambda: fn("numba"), args.repeat)
        npy, t_np = timed(lambda: fn("numpy"), args.repeat)
        same = nb == npy
        mismatch |= not same
        print(f"{name:32} {t_nb:10.4f} {t_np:10.4f} {t_np / max(t_nb, 1e-9):7.1f}x  {'yes' if same else 'NO'}")
    return 1 if mismatch else 0


if __name__ == "__main__":
    np.seterr(all="raise")
    sys.exit(main())
