"""Wick's theorem on a truncated oscillator.

Multi-time bath traces computed by brute force on a Fock space are compared
with the sum over ordered pairings of two-point functions.
"""
import numpy as np

from oqs import BathSpec, FockTruncation, TimeSequence, direct_bath_trace, enumerate_pairings, wick_sum
from oqs.bathcorr import DiscreteModeCorrelation

for m in (2, 4, 6):
    print(f"m={m}:", [q.pairs for q in enumerate_pairings(m)][:4], "...")

bath = BathSpec(((1.0, 0.5),), beta=2.0)
t = 1.0
corr = DiscreteModeCorrelation.from_bath(bath, t)
rng = np.random.default_rng(0)
for m in (1, 2, 3, 4, 6):
    s = TimeSequence(tuple(np.sort(rng.uniform(0, 2 * t, m))), t)
    direct = direct_bath_trace(s, bath, FockTruncation(20))
    print(f"m={m}  direct {direct:+.10f}   wick {wick_sum(s, corr):+.10f}")
