"""Bath-perturbation error bound and numerical checks of the identities behind it.

* :func:`observable_error_bound` -- ``||O_s|| (exp(||W_s||^2 I) - 1)`` with
  ``I = int_0^{2t} int_0^{s2} |dB|``.
* :func:`comb_identity_check` -- the simplex integral of a Wick sum equals
  ``(int int B)^{m/2} / (m/2)!``.
* :func:`identity_lhs` / :func:`identity_rhs` -- the difference of two Dyson
  series versus the ``dB``-only series dressed with the full propagator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bathcorr import (CorrelationFn, DiscreteModeCorrelation, abs_delta_double_integral,
                       as_correlation, delta_correlation)
from .contour import dyson_weights, i_power
from .dyson import (integrate_order, mc_estimate, monte_carlo_samples, simplex_volume,
                    tail_bound)
from .model import BathSpec, DysonConfig, PerturbationSpec, SystemSpec, is_spin_boson_coupling, operator_norm
from .oracle import FockTruncation, OracleModel
from .pairings import wick_sum_batch
from .quadrature import simplex_integral

ORACLE_CHUNK = 256


@dataclass(frozen=True)
class BoundReport:
    bound_value: float
    integral_abs_db: float
    integral_error: float
    o_norm: float
    w_norm: float
    observed_delta: complex | None = None
    slack: float = 0.0

    @property
    def satisfied(self) -> bool | None:
        if self.observed_delta is None:
            return None
        return abs(self.observed_delta) <= self.bound_value + self.slack

    def with_observed(self, delta: complex, slack: float = 0.0) -> "BoundReport":
        return BoundReport(self.bound_value, self.integral_abs_db, self.integral_error,
                           self.o_norm, self.w_norm, complex(delta), slack)


def bound_from_integral(o_norm: float, w_norm: float, integral: float) -> float:
    return o_norm * math.expm1(w_norm**2 * integral)


def observable_error_bound(sys: SystemSpec, p: PerturbationSpec, t: float,
                           quad_points: int = 32) -> BoundReport:
    """Upper bound on ``|<O(t)>_perturbed - <O(t)>_base|``."""
    db = delta_correlation(p, t)
    est = abs_delta_double_integral(db, t, quad_points)
    o, w = operator_norm(sys.o_s), operator_norm(sys.w_s)
    return BoundReport(bound_from_integral(o, w, est.value), est.value, est.error, o, w)


def corollary_bound_spin_boson(sys: SystemSpec, p: PerturbationSpec, t: float,
                               quad_points: int = 32) -> BoundReport:
    """Spin-boson form of the bound: ``||O_s|| (exp(4 int_0^t int_0^{s2} |dB|) - 1)``."""
    if not is_spin_boson_coupling(sys):
        raise ValueError("the spin-boson form of the bound needs the spin-boson coupling W_s = sigma_z")
    db = delta_correlation(p, t)
    est = abs_delta_double_integral(db, t, quad_points, upper=t)
    o = operator_norm(sys.o_s)
    return BoundReport(bound_from_integral(o, 1.0, 4 * est.value), 4 * est.value, 4 * est.error, o, 1.0)


@dataclass(frozen=True)
class CombCheck:
    lhs: complex
    rhs: complex
    discrepancy: float
    stderr: float
    method: str


def comb_identity_check(m: int, corr: CorrelationFn, interval: tuple[float, float],
                        method: str = "auto", samples: int = 1_000_000, seed: int = 0,
                        gauss_points: int = 12, workers: int = 1) -> CombCheck:
    """Compare ``int_simplex sum_q L_B(q)`` with ``(int int B)^{m/2} / (m/2)!``.

    ``method='auto'`` uses nested Gauss for ``m <= 4`` and Monte Carlo above.
    """
    if m < 2 or m % 2:
        raise ValueError("m must be an even integer >= 2")
    lo, hi = map(float, interval)
    if hi <= lo:
        raise ValueError("interval must satisfy Si < Sf")
    if method == "auto":
        method = "gauss" if m <= 4 else "monte_carlo"
    cuts = tuple(b for b in (corr.pivot,) if lo < b < hi)

    def wick(points):
        return wick_sum_batch(points, corr)

    two_point = simplex_integral(wick, 2, lo, hi, max(gauss_points, 24), cuts)
    rhs = two_point ** (m // 2) / math.factorial(m // 2)
    if method == "gauss":
        lhs, err = simplex_integral(wick, m, lo, hi, gauss_points, cuts), 0.0
    elif method == "monte_carlo":
        values = monte_carlo_samples(wick, m, lo, hi, samples, seed, workers)
        lhs, err = mc_estimate(values, simplex_volume(m, hi - lo))
    else:
        raise ValueError(f"unknown method {method!r}")
    return CombCheck(complex(lhs), complex(rhs), abs(lhs - rhs), err, method)


@dataclass(frozen=True)
class SeriesEstimate:
    value: complex
    per_order: tuple[tuple[int, complex, float], ...]
    tail_bound: float

    @property
    def stderr(self) -> float:
        return float(sum(e for _, _, e in self.per_order))


def identity_lhs(sys: SystemSpec, p: PerturbationSpec, t: float, max_order: int,
                 cfg: DysonConfig) -> SeriesEstimate:
    """Difference of the Dyson series for the perturbed and base correlations.

    Both Wick sums are evaluated at the same samples (common random numbers).
    """
    if max_order % 2:
        raise ValueError("max_order must be even")
    b = as_correlation(p.base, t)
    bt = as_correlation(p.perturbed, t)
    cfg = _with_t(cfg, t, max_order)

    def integrand(times):
        return dyson_weights(times, sys, t) * (wick_sum_batch(times, bt) - wick_sum_batch(times, b))

    orders = []
    for m in range(0, max_order + 1, 2):
        if m == 0:
            orders.append((0, 0j, 0.0))
            continue
        value, err = integrate_order(m, sys, b, cfg, integrand=integrand)
        orders.append((m, value, err))
    o, w = operator_norm(sys.o_s), operator_norm(sys.w_s)
    c, d = b.sup_bound(), delta_correlation(p, t).sup_bound()
    tail = tail_bound(o, w, c + d, 2 * t, max_order) - tail_bound(o, w, c, 2 * t, max_order)
    return SeriesEstimate(complex(sum(v for _, v, _ in orders)), tuple(orders), max(tail, 0.0))


def identity_rhs(sys: SystemSpec, p: PerturbationSpec, t: float, max_order: int, cfg: DysonConfig,
                 trunc: FockTruncation, model: OracleModel | None = None) -> SeriesEstimate:
    """``dB``-only series with ``tr(rho(0) U_ring)`` from the truncated interacting propagator."""
    if max_order % 2:
        raise ValueError("max_order must be even")
    if not isinstance(p.base, BathSpec):
        raise TypeError("identity_rhs needs a realisable base bath (BathSpec)")
    model = model or OracleModel(sys, p.base, trunc)
    db = delta_correlation(p, t)
    cfg = _with_t(cfg, t, max_order)

    def integrand(times):
        m = times.shape[1]
        sign = np.where(np.sum(times < t, axis=1) % 2, -1.0, 1.0)
        trace = model.propagators.trace_chain(times, t)
        return sign * i_power(m) * trace * wick_sum_batch(times, db)

    orders = []
    for m in range(2, max_order + 1, 2):
        value, err = integrate_order(m, sys, db, cfg, integrand=integrand, stream=1,
                                     chunk=ORACLE_CHUNK)
        orders.append((m, value, err))
    tail = tail_bound(operator_norm(sys.o_s), operator_norm(sys.w_s), db.sup_bound(), 2 * t, max_order)
    return SeriesEstimate(complex(sum(v for _, v, _ in orders)), tuple(orders), tail)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: SeriesEstimate
    rhs: SeriesEstimate
    fock_diagnostic: float

    @property
    def discrepancy(self) -> float:
        return abs(self.lhs.value - self.rhs.value)

    @property
    def budget(self) -> float:
        return (3 * (self.lhs.stderr + self.rhs.stderr) + self.lhs.tail_bound
                + self.rhs.tail_bound + self.fock_diagnostic)

    @property
    def within_budget(self) -> bool:
        return self.discrepancy <= self.budget


def check_identity(sys: SystemSpec, p: PerturbationSpec, t: float, max_order: int,
                   cfg: DysonConfig, trunc: FockTruncation) -> IdentityCheck:
    """Both sides of the identity; the Fock diagnostic compares cutoffs ``n_max`` and ``n_max + 4``."""
    lhs = identity_lhs(sys, p, t, max_order, cfg)
    rhs = identity_rhs(sys, p, t, max_order, cfg, trunc)
    rhs_big = identity_rhs(sys, p, t, max_order, cfg, trunc.enlarged())
    return IdentityCheck(lhs, rhs, abs(rhs.value - rhs_big.value))


@dataclass(frozen=True)
class FirstOrderCheck:
    epsilons: tuple[float, ...]
    ratios: tuple[complex, ...]
    richardson_ratio: complex
    target: complex


def first_order_check(sys: SystemSpec, bath: BathSpec, direction: CorrelationFn, t: float,
                      max_order: int, cfg: DysonConfig, trunc: FockTruncation,
                      epsilons=(1e-2, 1e-3)) -> FirstOrderCheck:
    """Scaling of the identity with ``dB = eps * direction`` as ``eps -> 0``.

    The target is the lowest-order right-hand term per unit ``eps``, which
    carries every diagram linear in ``dB``. Returns ``(lhs(eps)/eps)/target``
    for each ``eps`` and its linear Richardson extrapolation to ``eps = 0``.
    """
    if len(epsilons) != 2:
        raise ValueError("first_order_check needs exactly two epsilons")
    base = DiscreteModeCorrelation.from_bath(bath, t)
    target = identity_rhs(sys, PerturbationSpec(bath, base + direction), t, 2, cfg, trunc).value
    scaled = []
    for eps in epsilons:
        p = PerturbationSpec(base, base + eps * direction)
        scaled.append(identity_lhs(sys, p, t, max_order, cfg).value / eps)
    (e1, e2), (r1, r2) = epsilons, scaled
    extrap = (e1 * r2 - e2 * r1) / (e1 - e2)
    return FirstOrderCheck(tuple(epsilons), tuple(r / target for r in scaled), extrap / target, target)


def _with_t(cfg: DysonConfig, t: float, max_order: int) -> DysonConfig:
    return replace(cfg, t=t, max_order=max_order)
