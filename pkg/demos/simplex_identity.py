"""The simplex integral of a Wick sum collapses to a power of the two-point integral.

For any correlation B on [Si, Sf],
  int_{Sf > s_m > ... > s_1 > Si} sum_q prod B = (int int B)^{m/2} / (m/2)!.
The constant case gives 1/8 at m = 4 on [0, 1].
"""
from oqs import BathSpec, comb_identity_check
from oqs.bathcorr import ConstantCorrelation, DiscreteModeCorrelation

chk = comb_identity_check(4, ConstantCorrelation(1.0), (0.0, 1.0), method="gauss")
print(f"constant B, m=4: lhs {chk.lhs.real:.15f}, rhs {chk.rhs.real:.15f}")

corr = DiscreteModeCorrelation.from_bath(BathSpec(((0.7, 0.5), (1.6, 0.3)), 1.0), pivot=1.0)
for m, method in ((2, "gauss"), (4, "gauss"), (6, "monte_carlo")):
    chk = comb_identity_check(m, corr, (0.0, 2.0), method=method, samples=400_000)
    print(f"m={m} [{method}]  lhs {chk.lhs:.8f}  rhs {chk.rhs:.8f}  |diff| {chk.discrepancy:.1e}"
          f"  sigma {chk.stderr:.1e}")
