"""Dyson/Wick expansion of open quantum systems with bosonic baths.

Observables on the unfolded Keldysh contour, the bath-perturbation error
bound, and brute-force checks of the combinatorial identities behind it.
"""
from .bathcorr import (ConstantCorrelation, CorrelationFn, DiscreteModeCorrelation,
                       TabulatedCorrelation, abs_delta_double_integral, delta_correlation,
                       discretize_spectral_density, spin_boson_correlation,
                       unfolded_symmetry_check)
from .bounds import (BoundReport, check_identity, comb_identity_check, corollary_bound_spin_boson,
                     first_order_check, identity_lhs, identity_rhs, observable_error_bound)
from .contour import (TimeSequence, count_forward, dyson_weight, system_propagator, u_s)
from .dyson import DysonResult, convergence_bound, integrate_order, observable, order_m_integrand
from .model import (BathSpec, DysonConfig, PerturbationSpec, SystemSpec, operator_norm,
                    spin_boson_system)
from .oracle import (FockTruncation, TruncationError, build_bath_operators, direct_bath_trace,
                     exact_observable, full_propagator, u_ring, wick_verification)
from .pairings import (Pairing, enumerate_pairings, pairing_count, split_pairings, wick_product,
                       wick_sum)

__version__ = "0.1.0"
