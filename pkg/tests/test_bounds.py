import math

import numpy as np
import pytest
from conftest import PLUS, sigma_x_exact

from oqs.bathcorr import ConstantCorrelation, DiscreteModeCorrelation
from oqs.bounds import (bound_from_integral, check_identity, comb_identity_check,
                        corollary_bound_spin_boson, observable_error_bound)
from oqs.model import BathSpec, DysonConfig, PerturbationSpec, SystemSpec, spin_boson_system
from oqs.oracle import FockTruncation

BATH = BathSpec(((1.0, 0.2),), 2.0)


def test_no_perturbation_gives_zero_bound(sys_x):
    rep = observable_error_bound(sys_x, PerturbationSpec(BATH, BATH), 1.0)
    assert rep.bound_value == 0.0


def test_bound_formula():
    assert bound_from_integral(2.0, 0.5, 0.8) == pytest.approx(2 * (math.exp(0.2) - 1), rel=1e-15)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_bound_holds_against_closed_form(sys_x, t):
    p = PerturbationSpec(BATH, BATH.scaled(1.1, 0.9))
    rep = observable_error_bound(sys_x, p, t)
    delta = sigma_x_exact(1.0, p.perturbed, t) - sigma_x_exact(1.0, p.base, t)
    assert abs(delta) <= rep.bound_value
    assert rep.with_observed(delta).satisfied


def test_spin_boson_form_requires_sigma_z_coupling():
    s = SystemSpec(np.eye(2), np.array([[0, 1], [1, 0]]), np.eye(2), PLUS)
    with pytest.raises(ValueError):
        corollary_bound_spin_boson(s, PerturbationSpec(BATH, BATH.scaled(1.1)), 1.0)


def test_spin_boson_form_matches_general_bound(sys_z):
    p = PerturbationSpec(BathSpec(((1.0, 0.2), (2.5, 0.3)), 0.7), BathSpec(((1.05, 0.21), (2.4, 0.3)), 0.7))
    a = observable_error_bound(sys_z, p, 1.3).bound_value
    b = corollary_bound_spin_boson(sys_z, p, 1.3).bound_value
    assert b == pytest.approx(a, rel=1e-10)


def test_comb_identity_constant_case():
    chk = comb_identity_check(4, ConstantCorrelation(1.0), (0.0, 1.0), method="gauss")
    assert chk.lhs == pytest.approx(0.125, abs=1e-12) and chk.rhs == pytest.approx(0.125, abs=1e-12)


@pytest.mark.parametrize("m", [2, 4])
def test_comb_identity_gauss(m):
    corr = DiscreteModeCorrelation.from_bath(BathSpec(((0.7, 0.5), (1.6, 0.3)), 1.0), 1.0)
    chk = comb_identity_check(m, corr, (0.0, 2.0), method="gauss")
    assert chk.discrepancy < 1e-12


def test_comb_identity_rejects_odd():
    with pytest.raises(ValueError):
        comb_identity_check(3, ConstantCorrelation(1.0), (0.0, 1.0))


def test_identity_trivial_perturbation():
    s = spin_boson_system(1.0, 0.0, "sigma_x", rho_s=PLUS)
    cfg = DysonConfig(0.5, samples_per_order=2000)
    chk = check_identity(s, PerturbationSpec(BATH, BATH), 0.5, 2, cfg, FockTruncation(12))
    assert chk.lhs.value == 0 and chk.rhs.value == 0 and chk.within_budget
