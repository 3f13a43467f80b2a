"""Dyson series for a dephasing spin against exact evolution.

A spin with H_s = sigma_z couples through sigma_z to one oscillator. We track
<sigma_x(t)> starting from |+>, where the exact answer is known in closed form
and a Fock-truncated brute-force evolution is available as well.
"""
import math

import numpy as np

from oqs import BathSpec, DysonConfig, FockTruncation, exact_observable, observable, spin_boson_system
from oqs.bathcorr import DiscreteModeCorrelation

bath = BathSpec(((1.0, 0.2),), beta=2.0)
spin = spin_boson_system(1.0, 0.0, "sigma_x", rho_s=np.full((2, 2), 0.5))
t = 1.0

# brute force on 2 x 21 states, and the independent-boson closed form
exact = exact_observable(spin, bath, FockTruncation(20), t)
gamma = sum(2 * c * c / w**3 * (1 - math.cos(w * t)) / math.tanh(bath.beta * w / 2) for w, c in bath.modes)
print(f"exact      {exact:.12f}")
print(f"closed form {math.cos(2 * t) * math.exp(-gamma):.12f}")

corr = DiscreteModeCorrelation.from_bath(bath, t)
res = observable(spin, corr, DysonConfig(t, max_order=8, samples_per_order=200_000))
print(res.summary_line())

# each order should match cos(2t) (-gamma)^k / k!
for c in res.per_order:
    k = c.m // 2
    analytic = math.cos(2 * t) * (-gamma) ** k / math.factorial(k)
    print(f"m={c.m}  {c.value.real:+.3e} +- {c.stderr:.1e}   analytic {analytic:+.3e}   [{c.method}]")

for M in (0, 2, 4, 6, 8):
    print(f"M={M}: |partial - exact| = {abs(res.partial_sum(M) - exact):.2e}")
