"""Truncated Dyson series for ``<O(t)>`` with Wick-factorised bath contributions.

Order ``m`` is the integral over ``2t > s_m > ... > s_1 > 0`` of the system
weight times the Wick sum of the bath correlation. Order 0 is exact, order 2
can use nested Gauss-Legendre, and every other order is estimated by sorting
uniform samples of ``[0, 2t]^m``.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bathcorr import CorrelationFn
from .contour import dyson_weights
from .model import DysonConfig, SystemSpec, operator_norm
from .pairings import wick_sum_batch
from .quadrature import simplex_integral
from .rng import uniform_rows

CHUNK = 4096


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class OrderContribution:
    m: int
    value: complex
    stderr: float
    method: str


@dataclass(frozen=True)
class DysonResult:
    value: complex
    per_order: tuple[OrderContribution, ...]
    truncation_tail_bound: float
    config_echo: DysonConfig
    sup_b: float = 0.0

    @property
    def stderr(self) -> float:
        return float(np.sqrt(sum(c.stderr**2 for c in self.per_order)))

    @property
    def total_stderr(self) -> float:
        """Sum of per-order standard errors (a conservative combination)."""
        return float(sum(c.stderr for c in self.per_order))

    def partial_sum(self, max_order: int) -> complex:
        return complex(sum(c.value for c in self.per_order if c.m <= max_order))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("m,re,im,stderr\n")
        for c in self.per_order:
            buf.write(f"{c.m},{c.value.real:.17g},{c.value.imag:.17g},{c.stderr:.17g}\n")
        return buf.getvalue()

    def summary_line(self) -> str:
        return (f"<O(t)> = {self.value.real:.12g} {self.value.imag:+.3g}i "
                f"+- {self.stderr:.3g} (tail <= {self.truncation_tail_bound:.3g}, "
                f"M = {self.config_echo.max_order})")


def order_m_integrand(times, sys: SystemSpec, corr: CorrelationFn, t: float) -> np.ndarray:
    """System weight times Wick sum at each row of ``times`` (shape ``(N, m)``)."""
    times = np.atleast_2d(np.asarray(times, dtype=float))
    m = times.shape[1]
    if m % 2:
        raise ValueError(f"order m must be even, got {m}")
    if m == 0:
        return dyson_weights(times, sys, t)
    return dyson_weights(times, sys, t) * wick_sum_batch(times, corr)


def draw_sorted_times(seed: int, m: int, start: int, count: int, lo: float, hi: float,
                      stream: int = 0) -> np.ndarray:
    """Sorted uniform samples of ``[lo, hi]^m``; ties or endpoint hits are redrawn once."""
    span = hi - lo

    def draw(labels, first, n):
        return np.sort(lo + span * uniform_rows(seed, labels, first, n, m), axis=1)

    rows = draw((m, stream), start, count)
    bad = _degenerate(rows, lo)
    if bad.any():
        idx = np.flatnonzero(bad)
        redraw = np.concatenate([draw((m, stream, 1), start + i, 1) for i in idx])
        if _degenerate(redraw, lo).any():
            raise SamplingError(f"tied contour times persisted after redraw (m={m})")
        rows[idx] = redraw
    return rows


def _degenerate(rows: np.ndarray, lo: float) -> np.ndarray:
    return (rows[:, 0] <= lo) | np.any(np.diff(rows, axis=1) <= 0.0, axis=1)


def monte_carlo_samples(integrand: Callable[[np.ndarray], np.ndarray], m: int, lo: float, hi: float,
                        n_samples: int, seed: int, workers: int = 1, stream: int = 0,
                        chunk: int = CHUNK) -> np.ndarray:
    """Integrand values at ``n_samples`` sorted samples of ``[lo, hi]^m``, in sample order.

    Chunks are evaluated on a thread pool and concatenated by chunk index, so
    the output is identical for every worker count.
    """
    starts = list(range(0, n_samples, chunk))

    def job(start):
        count = min(chunk, n_samples - start)
        return np.asarray(integrand(draw_sorted_times(seed, m, start, count, lo, hi, stream)))

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, starts))
    else:
        parts = [job(s) for s in starts]
    return np.concatenate(parts)


def simplex_volume(m: int, length: float) -> float:
    return length**m / math.factorial(m)


def mc_estimate(values: np.ndarray, volume: float) -> tuple[complex, float]:
    """Mean times volume and its standard error."""
    n = values.size
    mean = complex(np.mean(values))
    if n < 2:
        return volume * mean, float("inf")
    var = float(np.sum(np.abs(values - mean) ** 2) / (n - 1))
    return volume * mean, volume * math.sqrt(var / n)


def integrate_order(m: int, sys: SystemSpec, corr: CorrelationFn, cfg: DysonConfig,
                    integrand: Callable | None = None, stream: int = 0,
                    chunk: int = CHUNK) -> tuple[complex, float]:
    """Order-``m`` contribution and its error estimate.

    ``integrand`` overrides the default Dyson integrand (used for identity
    checks that share the sample stream).
    """
    if m % 2:
        raise ValueError(f"order m must be even, got {m}")
    if m > cfg.max_order:
        raise ValueError(f"order {m} exceeds max_order {cfg.max_order}")
    t = cfg.t
    f = integrand or (lambda s: order_m_integrand(s, sys, corr, t))
    if m == 0:
        return complex(f(np.empty((1, 0)))[0]), 0.0
    if t == 0:
        return 0j, 0.0
    if m == 2 and cfg.integrator == "gauss":
        return simplex_integral(f, 2, 0.0, 2 * t, cfg.gauss_points, (t,), chunk), 0.0
    values = monte_carlo_samples(f, m, 0.0, 2 * t, cfg.samples_per_order, cfg.seed,
                                 cfg.workers, stream, chunk)
    return mc_estimate(values, simplex_volume(m, 2 * t))


def tail_bound(o_norm: float, w_norm: float, sup_b: float, length: float, max_order: int) -> float:
    """``||O|| sum_{even m > M} (L^m / m!!) (C ||W||^2)^{m/2}``, summed to convergence."""
    x = sup_b * w_norm**2 * length**2 / 2.0
    if x == 0.0 or o_norm == 0.0:
        return 0.0
    k = max_order // 2 + 1
    term = math.exp(k * math.log(x) - math.lgamma(k + 1))
    total = 0.0
    while True:
        total += term
        k += 1
        term *= x / k
        if term <= 1e-17 * total and k > x:
            break
    return o_norm * total


def envelope_term(m: int, o_norm: float, w_norm: float, sup_b: float, length: float) -> float:
    """``||O|| (L^m / m!!) (C ||W||^2)^{m/2}``, the order-m term of the convergence envelope."""
    k = m // 2
    return o_norm * (sup_b * w_norm**2 * length**2 / 2.0) ** k / math.factorial(k)


def convergence_bound(sys: SystemSpec, sup_b: float, interval: float) -> float:
    """``||O_s|| exp(C ||W_s||^2 interval^2 / 2)``."""
    if sup_b < 0:
        raise ValueError("sup_b must be >= 0")
    o, w = operator_norm(sys.o_s), operator_norm(sys.w_s)
    return o * math.exp(sup_b * w**2 * interval**2 / 2.0)


def observable(sys: SystemSpec, corr: CorrelationFn, cfg: DysonConfig) -> DysonResult:
    """``<O(t)>`` from the Dyson series truncated at ``cfg.max_order``."""
    sup_b = corr.sup_bound()
    if not math.isfinite(sup_b):
        raise ValueError("correlation function is unbounded")
    orders = []
    w_zero = not np.any(sys.w_s)
    for m in range(0, cfg.max_order + 1, 2):
        if m and w_zero:
            orders.append(OrderContribution(m, 0j, 0.0, "exact"))
            continue
        value, err = integrate_order(m, sys, corr, cfg)
        orders.append(OrderContribution(m, value, err, _method(m, cfg)))
    tail = 0.0 if w_zero else tail_bound(
        operator_norm(sys.o_s), operator_norm(sys.w_s), sup_b, 2 * cfg.t, cfg.max_order)
    return DysonResult(
        value=complex(sum(c.value for c in orders)),
        per_order=tuple(orders),
        truncation_tail_bound=tail,
        config_echo=cfg,
        sup_b=sup_b,
    )


def _method(m: int, cfg: DysonConfig) -> str:
    if m == 0 or cfg.t == 0:
        return "exact"
    if m == 2 and cfg.integrator == "gauss":
        return "gauss"
    return "monte_carlo"
