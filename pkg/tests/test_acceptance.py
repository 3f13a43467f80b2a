"""Acceptance suite: one pass/fail line per criterion, printed in the pytest summary.

Run with ``pytest tests/test_acceptance.py`` (or ``python tests/test_acceptance.py``).

The reference instance is the single-mode spin-boson model with epsilon=1,
delta=0, omega=1, c=0.2, beta=2, t=1. With ``O_s = sigma_z`` and
``W_s = sigma_z`` the observable is conserved, every order m >= 2 vanishes
identically, and the clauses that compare orders (monotone gap, first-order
ratio) have nothing to measure. Those clauses are run on the literal instance
and reported as they come out; the same physical parameters with
``O_s = sigma_x`` and ``rho_s = |+><+|`` carry the non-degenerate version.
"""
import math
import sys
import time

import numpy as np
import pytest
from conftest import PLUS, sigma_x_exact

from oqs.bathcorr import ConstantCorrelation, DiscreteModeCorrelation
from oqs.bounds import (check_identity, comb_identity_check, corollary_bound_spin_boson,
                        first_order_check, observable_error_bound)
from oqs.cli import main as cli_main
from oqs.contour import TimeSequence
from oqs.dyson import convergence_bound, observable
from oqs.model import BathSpec, DysonConfig, PerturbationSpec, spin_boson_system
from oqs.oracle import (FockTruncation, direct_bath_trace, exact_observable,
                        random_time_sequence, wick_verification)
from oqs.pairings import enumerate_pairings, pairing_count

T = 1.0
BATH = BathSpec(((1.0, 0.2),), 2.0)
TRUNC = FockTruncation(n_max=20)
SAMPLES = 200_000
SEED = 2024


def literal_system():
    return spin_boson_system(1.0, 0.0, "sigma_z")


def coherent_system():
    return spin_boson_system(1.0, 0.0, "sigma_x", rho_s=PLUS)


INSTANCES = {"sigma_z literal": literal_system, "sigma_x |+>": coherent_system}


@pytest.fixture(scope="module")
def dyson_runs():
    runs = {}
    for name, make in INSTANCES.items():
        s = make()
        corr = DiscreteModeCorrelation.from_bath(BATH, T)
        start = time.perf_counter()
        res = observable(s, corr, DysonConfig(T, max_order=6, samples_per_order=SAMPLES, seed=SEED))
        exact = exact_observable(s, BATH, TRUNC, T)
        runs[name] = (s, res, exact, time.perf_counter() - start)
    return runs


def perturbations(n=24, seed=7):
    """Coupling and frequency factors drawn from [0.9, 1.1], plus the four corners."""
    rng = np.random.default_rng(seed)
    factors = [(1.1, 1.0), (0.9, 1.0), (1.0, 1.1), (1.0, 0.9)]
    factors += [tuple(f) for f in rng.uniform(0.9, 1.1, size=(n - 4, 2))]
    return [BATH.scaled(cf, wf) for cf, wf in factors]


def test_c1_pairing_counts(report):
    start = time.perf_counter()
    ok = True
    for m in (2, 4, 6, 8, 10, 12):
        seen = {q.pairs for q in enumerate_pairings(m) if q.is_valid(m)}
        ok &= len(seen) == pairing_count(m) == math.prod(range(m - 1, 0, -2))
    dt = time.perf_counter() - start
    assert report("C1 pairing counts (m-1)!! for m=2..12", ok and dt < 5, f"runtime {dt:.2f}s (< 5s)")


def test_c2_wick_theorem(report):
    bath = BathSpec(((1.0, 0.5),), 2.0)
    start = time.perf_counter()
    devs = {m: wick_verification(m, bath, TRUNC, T, 50, seed=m) for m in (2, 4)}
    rng = np.random.default_rng(1)
    odd = max(abs(direct_bath_trace(random_time_sequence(rng, m, T), bath, TRUNC, T))
              for m in (1, 3, 5) for _ in range(50))
    dt = time.perf_counter() - start
    ok = max(devs.values()) < 1e-6 and odd < 1e-10 and dt < 30
    assert report("C2 Wick theorem vs direct bath trace", ok,
                  f"max rel dev m=2 {devs[2]:.2e}, m=4 {devs[4]:.2e} (< 1e-6); "
                  f"max |L_b| odd m {odd:.2e} (< 1e-10); {dt:.1f}s (< 30s)")


def test_c3_combinatorial_identity(report):
    start = time.perf_counter()
    const = comb_identity_check(4, ConstantCorrelation(1.0), (0.0, 1.0), method="gauss")
    ok = abs(const.lhs - 0.125) < 1e-10 and abs(const.rhs - 0.125) < 1e-10
    details = [f"constant B: lhs {const.lhs.real:.15f} rhs {const.rhs.real:.15f}"]
    rng = np.random.default_rng(33)
    worst = 0.0
    for k in range(3):
        modes = tuple(zip(rng.uniform(0.5, 2.0, 2), rng.uniform(0.1, 0.5, 2)))
        corr = DiscreteModeCorrelation.from_bath(BathSpec(modes, rng.uniform(0.5, 3.0)), T)
        for m in (4, 6):
            chk = comb_identity_check(m, corr, (0.0, 2 * T), method="monte_carlo",
                                      samples=1_000_000, seed=100 + k)
            worst = max(worst, chk.discrepancy / chk.stderr)
            ok &= chk.discrepancy <= 3 * chk.stderr
    dt = time.perf_counter() - start
    ok &= dt < 60
    details.append(f"random two-mode baths m=4,6: worst |lhs-rhs|/sigma {worst:.2f} (<= 3)")
    assert report("C3 simplex Wick integral identity", ok, "; ".join(details) + f"; {dt:.1f}s (< 60s)")


@pytest.mark.parametrize("name", list(INSTANCES))
def test_c4_dyson_matches_oracle(report, dyson_runs, name):
    _, res, exact, dt = dyson_runs[name]
    gap = abs(res.value.real - exact)
    allowed = res.truncation_tail_bound + 3 * res.total_stderr
    ok = gap <= allowed and dt < 120
    assert report(f"C4 [{name}] Dyson M=6 vs exact", ok,
                  f"|{res.value.real:.10f} - {exact:.10f}| = {gap:.2e} <= tail + 3 sigma = "
                  f"{allowed:.2e}; {dt:.1f}s (< 120s)")


@pytest.mark.parametrize("name", list(INSTANCES))
def test_c4_gap_shrinks_monotonically(report, dyson_runs, name):
    _, res, exact, _ = dyson_runs[name]
    gaps = [abs(res.partial_sum(m) - exact) for m in (2, 4, 6)]
    ok = gaps[0] > gaps[1] > gaps[2]
    note = "" if ok or name != "sigma_z literal" else " (all orders vanish; gaps are MC noise)"
    assert report(f"C4 [{name}] gap shrinks M=2->4->6", ok,
                  ", ".join(f"{g:.2e}" for g in gaps) + note)


@pytest.mark.parametrize("name", list(INSTANCES))
def test_c5_convergence_envelope(report, dyson_runs, name):
    s, res, _, _ = dyson_runs[name]
    abs_sum = sum(abs(c.value) for c in res.per_order)
    env = convergence_bound(s, res.sup_b, 2 * T)
    assert report(f"C5 [{name}] sum |contribution_m| <= envelope", abs_sum <= env,
                  f"{abs_sum:.6f} <= {env:.6f}")


@pytest.mark.parametrize("name", list(INSTANCES))
def test_c6_bound_never_violated(report, name):
    s = INSTANCES[name]()
    start = time.perf_counter()
    worst, violations, count = 0.0, 0, 0
    for t in (0.5, 1.0, 2.0):
        base = exact_observable(s, BATH, TRUNC, t)
        for pert in perturbations():
            delta = exact_observable(s, pert, TRUNC, t) - base
            bound = observable_error_bound(s, PerturbationSpec(BATH, pert), t).bound_value
            violations += abs(delta) > bound
            worst = max(worst, abs(delta) / bound)
            count += 1
    dt = time.perf_counter() - start
    ok = violations == 0 and dt < 300
    assert report(f"C6 [{name}] oracle |dO| <= bound", ok,
                  f"{count} cases (24 perturbations x 3 times), {violations} violations, "
                  f"max |dO|/bound {worst:.3f}; {dt:.1f}s (< 300s)")


def test_c6_closed_form_cross_check(report):
    # the oracle itself agrees with the dephasing closed form on the sigma_x instance
    worst = max(abs(exact_observable(coherent_system(), p, TRUNC, t) - sigma_x_exact(1.0, p, t))
                for t in (0.5, 1.0, 2.0) for p in perturbations()[:6])
    assert report("C6 oracle vs closed form (sigma_x)", worst < 1e-9, f"max deviation {worst:.1e}")


def test_c7_spin_boson_form_matches_bound(report):
    s = literal_system()
    worst = 0.0
    for t in (0.5, 1.0, 2.0):
        for pert in perturbations():
            p = PerturbationSpec(BATH, pert)
            a = observable_error_bound(s, p, t).bound_value
            b = corollary_bound_spin_boson(s, p, t).bound_value
            worst = max(worst, abs(a - b) / a)
    assert report("C7 factor-4 spin-boson form equals general bound", worst < 1e-6,
                  f"max relative difference {worst:.1e} (< 1e-6)")


@pytest.fixture(scope="module")
def identity_runs():
    runs = {}
    cfg = DysonConfig(T, samples_per_order=100_000, seed=SEED)
    direction = 2 * DiscreteModeCorrelation.from_bath(BATH, T)
    for name, make in INSTANCES.items():
        s = make()
        start = time.perf_counter()
        chk = check_identity(s, PerturbationSpec(BATH, BATH.scaled(1.01, 1.0)), T, 4, cfg, TRUNC)
        fo = first_order_check(s, BATH, direction, T, 4, cfg, TRUNC)
        runs[name] = (chk, fo, time.perf_counter() - start)
    return runs


@pytest.mark.parametrize("name", list(INSTANCES))
def test_c8_identity_within_budget(report, identity_runs, name):
    chk, _, dt = identity_runs[name]
    ok = chk.within_budget and dt < 600
    assert report(f"C8 [{name}] identity lhs vs rhs", ok,
                  f"|{chk.lhs.value.real:.6e} - {chk.rhs.value.real:.6e}| = {chk.discrepancy:.2e} "
                  f"<= budget {chk.budget:.2e} (Fock diagnostic {chk.fock_diagnostic:.1e}); "
                  f"{dt:.1f}s (< 600s)")


@pytest.mark.parametrize("name", list(INSTANCES))
def test_c8_first_order_ratio(report, identity_runs, name):
    _, fo, _ = identity_runs[name]
    r = fo.richardson_ratio
    ok = 0.9 <= r.real <= 1.1 and abs(r.imag) <= 0.1
    note = "" if ok or name != "sigma_z literal" else " (first-order target is pure roundoff)"
    assert report(f"C8 [{name}] first-order Richardson ratio in [0.9, 1.1]", ok,
                  f"ratio {r.real:.6g}{r.imag:+.2g}i, target {abs(fo.target):.2e}{note}")


@pytest.mark.parametrize("name, preset", [("sigma_z literal", []),
                                          ("sigma_x |+>", ["--set", "system.observable=sigma_x",
                                                           "--set", "system.initial_state=plus"])])
def test_c9_reproducible_orders_csv(report, tmp_path, name, preset):
    cfg = tmp_path / "run.ini"
    cfg.write_text(f"""[system]
preset = spin_boson
epsilon = 1.0
delta = 0.0
[bath]
modes = 1.0:0.2
beta = 2.0
[dyson]
t = {T}
max_order = 6
samples_per_order = {SAMPLES}
seed = {SEED}
""")
    outputs = []
    for workers in (1, 4):
        prefix = tmp_path / f"w{workers}"
        code = cli_main(["observable", "--config", str(cfg), "--workers", str(workers),
                         "--out", str(prefix)] + preset)
        outputs.append((code, (tmp_path / f"w{workers}_orders.csv").read_bytes()))
    ok = outputs[0][0] == outputs[1][0] == 0 and outputs[0][1] == outputs[1][1]
    assert report(f"C9 [{name}] orders CSV byte-identical for workers 1 and 4", ok,
                  f"{len(outputs[0][1])} bytes each")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
