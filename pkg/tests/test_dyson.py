import math

import numpy as np
import pytest
from conftest import PLUS, dephasing_exponent

from oqs.bathcorr import DiscreteModeCorrelation
from oqs.dyson import (draw_sorted_times, envelope_term, integrate_order, monte_carlo_samples,
                       observable, order_m_integrand, tail_bound)
from oqs.model import DysonConfig, SystemSpec, spin_boson_system

T = 1.0


def test_order_zero_is_free_evolution(sys_x, bath1):
    res = observable(sys_x, DiscreteModeCorrelation.from_bath(bath1, T), DysonConfig(T, max_order=0))
    assert res.value == pytest.approx(math.cos(2.0), abs=1e-14)


def test_orders_match_dephasing_expansion(sys_x, bath1):
    """With sigma_z coupling the order-m term is cos(2t) (-G)^(m/2) / (m/2)!."""
    corr = DiscreteModeCorrelation.from_bath(bath1, T)
    res = observable(sys_x, corr, DysonConfig(T, max_order=6, samples_per_order=100_000, seed=5))
    g = dephasing_exponent(bath1, T)
    for c in res.per_order:
        k = c.m // 2
        expect = math.cos(2.0) * (-g) ** k / math.factorial(k)
        tol = 1e-12 if c.method in ("gauss", "exact") else 4 * c.stderr
        assert abs(c.value - expect) <= tol, (c.m, c.value, expect, c.stderr)
    # frozen reference for the Gauss order-2 value
    assert res.per_order[1].value.real == pytest.approx(0.02009487490784798, abs=1e-15)


def test_odd_order_rejected(sys_x, bath1):
    corr = DiscreteModeCorrelation.from_bath(bath1, T)
    with pytest.raises(ValueError):
        order_m_integrand(np.array([[0.2, 0.5, 0.9]]), sys_x, corr, T)


def test_t_zero_is_initial_expectation(sys_mixed, bath1):
    res = observable(sys_mixed, DiscreteModeCorrelation.from_bath(bath1, 0.0), DysonConfig(0.0))
    assert res.value == pytest.approx(1.0, abs=1e-15)  # <+|sigma_x|+>
    assert res.truncation_tail_bound == 0.0


def test_zero_coupling_skips_higher_orders(bath1):
    s = SystemSpec(np.diag([1.0, -1.0]), np.zeros((2, 2)), np.array([[0, 1], [1, 0]]), PLUS)
    res = observable(s, DiscreteModeCorrelation.from_bath(bath1, T), DysonConfig(T, max_order=4))
    assert all(c.value == 0 for c in res.per_order[1:]) and res.truncation_tail_bound == 0.0


def test_mc_agrees_with_gauss_at_order_two(sys_mixed, bath1):
    corr = DiscreteModeCorrelation.from_bath(bath1, T)
    ref, _ = integrate_order(2, sys_mixed, corr, DysonConfig(T, max_order=2, gauss_points=48))
    hits = 0
    for seed in range(20):
        cfg = DysonConfig(T, max_order=2, integrator="monte_carlo", samples_per_order=20_000, seed=seed)
        v, e = integrate_order(2, sys_mixed, corr, cfg)
        hits += abs(v - ref) <= 3 * e
    assert hits >= 18  # about 0.3% of 3-sigma misses each under normal errors


def test_sorted_draws_are_chunk_independent():
    whole = draw_sorted_times(11, 4, 0, 1000, 0.0, 2.0)
    parts = np.concatenate([draw_sorted_times(11, 4, s, 250, 0.0, 2.0) for s in range(0, 1000, 250)])
    assert np.array_equal(whole, parts)
    assert np.all(np.diff(whole, axis=1) > 0) and whole.min() > 0 and whole.max() < 2
    assert not np.array_equal(whole, draw_sorted_times(12, 4, 0, 1000, 0.0, 2.0))


def test_worker_count_does_not_change_samples():
    f = lambda s: np.sum(s, axis=1)  # noqa: E731
    one = monte_carlo_samples(f, 3, 0.0, 1.0, 20_000, seed=3, workers=1, chunk=1000)
    four = monte_carlo_samples(f, 3, 0.0, 1.0, 20_000, seed=3, workers=4, chunk=1000)
    assert np.array_equal(one, four)


def test_orders_csv_is_reproducible(sys_mixed, bath1):
    corr = DiscreteModeCorrelation.from_bath(bath1, T)
    cfg = DysonConfig(T, max_order=4, samples_per_order=10_000, seed=9)
    a = observable(sys_mixed, corr, cfg).to_csv()
    b = observable(sys_mixed, corr, DysonConfig(T, max_order=4, samples_per_order=10_000, seed=9,
                                                workers=4)).to_csv()
    assert a == b and a.startswith("m,re,im,stderr\n")
    row = a.splitlines()[2].split(",")
    assert float(row[1]) == observable(sys_mixed, corr, cfg).per_order[1].value.real


def test_tail_bound_matches_series():
    x = 0.7
    exact = math.exp(x) - sum(x**k / math.factorial(k) for k in range(3))
    # o=2, w=1, sup_b=0.35, L=2 gives x = 0.35 * 4 / 2
    assert tail_bound(2.0, 1.0, 0.35, 2.0, 4) == pytest.approx(2 * exact, rel=1e-13)
    assert tail_bound(1.0, 1.0, 0.0, 2.0, 4) == 0.0
    assert envelope_term(4, 1.0, 1.0, 0.35, 2.0) == pytest.approx(x**2 / 2, rel=1e-14)


def test_mixed_system_against_oracle(sys_mixed, bath1):
    from oqs.oracle import FockTruncation, exact_observable
    corr = DiscreteModeCorrelation.from_bath(bath1, T)
    res = observable(sys_mixed, corr, DysonConfig(T, max_order=6, samples_per_order=100_000))
    exact = exact_observable(sys_mixed, bath1, FockTruncation(12), T)
    assert abs(res.value.real - exact) <= res.truncation_tail_bound + 3 * res.total_stderr
    assert spin_boson_system(0.6, 0.8).dim == 2
