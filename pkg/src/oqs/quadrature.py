"""Nested Gauss-Legendre rules on ordered simplices ``hi > s_m > ... > s_1 > lo``.

Each variable is integrated over ``[lo, s_{k+1}]`` with the interval split at
the given breakpoints, so integrands that are smooth on each piece (e.g. with
a kink at the Keldysh pivot) keep spectral accuracy.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np


class QuadEstimate(NamedTuple):
    value: complex
    error: float


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_interval(a, b, n: int):
    """Nodes ``(N, n)`` and weights on each interval ``[a_i, b_i]``."""
    x, w = _leggauss(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def simplex_rule(m: int, lo: float, hi: float, n: int,
                 breakpoints: Sequence[float] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (rows ``s_1 < ... < s_m``) and weights for the ordered simplex.

    The outermost variable is ``s_m`` on ``[lo, hi]``; each inner variable
    runs over ``[lo, s_{k+1}]``. Every interval is cut at the interior
    breakpoints and gets an ``n``-point rule per piece.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    if hi < lo:
        raise ValueError("need lo <= hi")
    edges = [float(b) for b in sorted(breakpoints) if lo < b < hi]
    pts = np.empty((1, 0))
    wts = np.ones(1)
    upper = np.array([float(hi)])
    for _ in range(m):
        cuts = [lo] + edges + [np.inf]
        new_pts, new_wts = [], []
        for a, b in zip(cuts[:-1], cuts[1:]):
            seg_hi = np.minimum(b, upper)
            keep = seg_hi > a
            if not keep.any():
                continue
            x, w = gauss_interval(np.full(keep.sum(), a), seg_hi[keep], n)
            base = pts[keep]
            new_pts.append(np.concatenate([
                x.reshape(-1, 1),
                np.repeat(base, n, axis=0),
            ], axis=1))
            new_wts.append((wts[keep][:, None] * w).reshape(-1))
        if not new_pts:
            return np.empty((0, m)), np.empty(0)
        pts = np.concatenate(new_pts)
        wts = np.concatenate(new_wts)
        upper = pts[:, 0]
    return pts, wts


def simplex_integral(f: Callable, m: int, lo: float, hi: float, n: int,
                     breakpoints: Sequence[float] = (), chunk: int = 65536) -> complex:
    """Integrate vectorised ``f(points)`` (points shape ``(N, m)``) over the simplex."""
    pts, wts = simplex_rule(m, lo, hi, n, breakpoints)
    total = 0.0 + 0.0j
    for start in range(0, len(wts), chunk):
        sl = slice(start, start + chunk)
        total += complex(np.dot(wts[sl], f(pts[sl])))
    return total


def triangle_integral(f: Callable, lo: float, hi: float, n: int,
                      breakpoints: Sequence[float] = ()) -> QuadEstimate:
    """``int_lo^hi int_lo^{s2} f(s1, s2) ds1 ds2`` with a doubling error estimate."""
    def g(p):
        return f(p[:, 0], p[:, 1])

    coarse = simplex_integral(g, 2, lo, hi, n, breakpoints)
    fine = simplex_integral(g, 2, lo, hi, 2 * n, breakpoints)
    return QuadEstimate(fine, abs(fine - coarse))
