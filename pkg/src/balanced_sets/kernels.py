"""Hot inner loops over integer-scaled coordinates.

Every rational quantity a kernel sees has been multiplied by a common
denominator, so comparisons and sums are exact integer operations. When the
scaled magnitudes fit comfortably in int64 the numba kernels run; otherwise
(or when the numpy backend is selected) the vectorized numpy versions run on
whatever dtype they are handed, including ``object`` arrays of Python ints.

All kernels return the same answer on both paths, including tie-breaking.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from ._accel import njit, resolve_backend

# Headroom: sums of two scaled values and products bounded by the gauge scale
# must stay below 2**63.
INT64_SAFE = 1 << 60


def fits_int64(*bounds: int) -> bool:
    return all(abs(int(b)) < INT64_SAFE for b in bounds)


def scale_values(values: Iterable[Fraction], den: int) -> list:
    out = []
    for v in values:
        num = v * den
        if num.denominator != 1:
            raise ValueError(f"{v} is not a multiple of 1/{den}")
        out.append(num.numerator)
    return out


def as_array(ints: list, force_object: bool = False) -> np.ndarray:
    if not force_object and fits_int64(max((abs(v) for v in ints), default=0)):
        return np.asarray(ints, dtype=np.int64)
    arr = np.empty(len(ints), dtype=object)
    arr[:] = ints
    return arr


def _use_numba(backend, *arrays) -> bool:
    return resolve_backend(backend) == "numba" and all(a.dtype == np.int64 for a in arrays)


# --------------------------------------------------------------------------
# exhaustive pairwise separation

class PairScan(NamedTuple):
    first_i: int  # first pair (lexicographic) with distance <= threshold, or -1
    first_j: int
    min_dist: int
    min_i: int
    min_j: int


@njit(cache=True)
def _pair_scan_nb(lo, hi, threshold):
    n = lo.shape[0]
    fi = -1
    fj = -1
    best = -1
    bi = -1
    bj = -1
    for i in range(n - 1):
        for j in range(i + 1, n):
            gap = max(lo[i], lo[j]) - min(hi[i], hi[j])
            if gap < 0:
                gap = 0
            if fi < 0 and gap <= threshold:
                fi = i
                fj = j
            if best < 0 or gap < best:
                best = gap
                bi = i
                bj = j
    return fi, fj, best, bi, bj


def _pair_scan_np(lo, hi, threshold):
    n = lo.shape[0]
    fi = fj = bi = bj = -1
    best = None
    for i in range(n - 1):
        gap = np.maximum(np.maximum(lo[i], lo[i + 1:]) - np.minimum(hi[i], hi[i + 1:]), 0)
        if fi < 0:
            bad = np.flatnonzero(gap <= threshold)
            if bad.size:
                fi, fj = i, i + 1 + int(bad[0])
        k = int(np.argmin(gap))
        if best is None or gap[k] < best:
            best, bi, bj = gap[k], i, i + 1 + k
    return fi, fj, (-1 if best is None else best), bi, bj


def pair_scan(lo: np.ndarray, hi: np.ndarray, threshold: int, backend=None) -> PairScan:
    """Check every pair ``i < j`` of intervals against ``dist > threshold``."""
    if _use_numba(backend, lo, hi) and fits_int64(threshold):
        res = _pair_scan_nb(lo, hi, np.int64(threshold))
    else:
        res = _pair_scan_np(lo, hi, threshold)
    fi, fj, best, bi, bj = res
    return PairScan(int(fi), int(fj), int(best), int(bi), int(bj))


# --------------------------------------------------------------------------
# piecewise-linear gauge on scaled integers

class ScaledGauge(NamedTuple):
    """``scale * h(x / den)`` as integer segments starting at ``xs[k]``."""

    xs: np.ndarray
    ys: np.ndarray
    slopes: np.ndarray
    scale: int
    den: int


@njit(cache=True)
def _gauge_at_nb(xs, ys, slopes, x):
    if x == 0:
        return 0
    if x < xs[0]:
        return -1
    k = np.searchsorted(xs, x, side="right") - 1
    return ys[k] + (x - xs[k]) * slopes[k]


def gauge_values_np(g: ScaledGauge, x: np.ndarray) -> np.ndarray:
    """Vectorized evaluation; entries below the floor come back as -1."""
    k = np.searchsorted(g.xs, x, side="right") - 1
    below = k < 0
    k = np.where(below, 0, k)
    out = g.ys[k] + (x - g.xs[k]) * g.slopes[k]
    out = np.where(below, -1, out)
    return np.where(x == 0, 0, out)


# --------------------------------------------------------------------------
# minimum-cost cover by consecutive runs

@njit(cache=True)
def _run_cover_nb(lo, hi, xs, ys, slopes):
    n = lo.shape[0]
    dp = np.zeros(n + 1, dtype=np.int64)
    back = np.zeros(n + 1, dtype=np.int64)
    for j in range(n):
        run_lo = lo[j]
        run_hi = hi[j]
        best = -1
        arg = -1
        for i in range(j, -1, -1):
            if lo[i] < run_lo:
                run_lo = lo[i]
            if hi[i] > run_hi:
                run_hi = hi[i]
            c = _gauge_at_nb(xs, ys, slopes, run_hi - run_lo)
            if c < 0:
                return dp, back, j, i
            cand = dp[i] + c
            if best < 0 or cand < best:
                best = cand
                arg = i
        dp[j + 1] = best
        back[j + 1] = arg
    return dp, back, -1, -1


def _run_cover_np(lo, hi, g: ScaledGauge):
    n = lo.shape[0]
    exact_int64 = all(a.dtype == np.int64 for a in (lo, hi, g.xs, g.ys, g.slopes))
    dp = np.zeros(n + 1, dtype=np.int64 if exact_int64 and fits_int64(4 * g.scale) else object)
    back = np.zeros(n + 1, dtype=np.int64)
    for j in range(n):
        run_lo = np.minimum.accumulate(lo[j::-1])
        run_hi = np.maximum.accumulate(hi[j::-1])
        cost = gauge_values_np(g, run_hi - run_lo)
        bad = np.flatnonzero(cost < 0)
        if bad.size:
            return dp, back, j, j - int(bad[0])
        cand = dp[j::-1] + cost
        t = int(np.argmin(cand))
        dp[j + 1] = cand[t]
        back[j + 1] = j - t
    return dp, back, -1, -1


class RunCover(NamedTuple):
    dp: np.ndarray  # dp[k]: optimal scaled cost covering the first k pieces
    back: np.ndarray  # back[k]: start of the last run in that optimum
    fail_j: int  # -1, or the run (fail_i..fail_j) whose hull fell below the floor
    fail_i: int


def run_cover(lo: np.ndarray, hi: np.ndarray, g: ScaledGauge, backend=None) -> RunCover:
    """Optimal partition of position-sorted intervals into consecutive runs.

    The cost of a run is the gauge at its hull diameter. Ties resolve to the
    run starting furthest right.
    """
    arrays = (lo, hi, g.xs, g.ys, g.slopes)
    # dp values never exceed twice the single-run cost, which is <= scale
    if _use_numba(backend, *arrays) and fits_int64(4 * g.scale):
        dp, back, fj, fi = _run_cover_nb(*arrays)
    else:
        dp, back, fj, fi = _run_cover_np(lo, hi, g)
    return RunCover(dp, back, int(fj), int(fi))


# --------------------------------------------------------------------------
# strict pairwise contraction of sampled maps

@njit(cache=True)
def _expansive_pair_nb(x, fx):
    n = x.shape[0]
    for i in range(n - 1):
        for j in range(i + 1, n):
            d = fx[i] - fx[j]
            if d < 0:
                d = -d
            if d >= x[j] - x[i]:
                return i, j
    return -1, -1


def _expansive_pair_np(x, fx):
    n = x.shape[0]
    for i in range(n - 1):
        d = np.abs(fx[i + 1:] - fx[i])
        bad = np.flatnonzero(d >= x[i + 1:] - x[i])
        if bad.size:
            return i, i + 1 + int(bad[0])
    return -1, -1


def first_expansive_pair(x: np.ndarray, fx: np.ndarray, backend=None) -> tuple:
    """First ``(i, j)``, ``i < j``, with ``|fx_i - fx_j| >= x_j - x_i``; x sorted."""
    if _use_numba(backend, x, fx):
        i, j = _expansive_pair_nb(x, fx)
    else:
        i, j = _expansive_pair_np(x, fx)
    return int(i), int(j)
