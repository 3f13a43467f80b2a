"""How far can a bath perturbation move an observable?

Perturb the coupling and frequency of the bath mode by a few percent, and
compare the exact change of <sigma_x(t)> with the a-priori bound
||O|| (exp(||W||^2 int int |dB|) - 1). Note the bound grows with t but has no
exponential-in-time prefactor.
"""
import numpy as np

from oqs import (BathSpec, FockTruncation, PerturbationSpec, corollary_bound_spin_boson,
                 exact_observable, observable_error_bound, spin_boson_system)

bath = BathSpec(((1.0, 0.2),), beta=2.0)
spin = spin_boson_system(1.0, 0.0, "sigma_x", rho_s=np.full((2, 2), 0.5))
trunc = FockTruncation(20)

print(" t    coupling  freq    |dO| exact   bound   spin-boson")
for t in (0.5, 1.0, 2.0, 4.0):
    base = exact_observable(spin, bath, trunc, t)
    for cf, wf in ((1.1, 1.0), (1.0, 0.9), (0.95, 1.05)):
        pert = bath.scaled(cf, wf)
        p = PerturbationSpec(bath, pert)
        delta = exact_observable(spin, pert, trunc, t) - base
        b = observable_error_bound(spin, p, t).bound_value
        c = corollary_bound_spin_boson(spin, p, t).bound_value
        print(f"{t:4.1f}  {cf:8.2f}  {wf:5.2f}   {abs(delta):.3e}   {b:.3e}  {c:.3e}")
