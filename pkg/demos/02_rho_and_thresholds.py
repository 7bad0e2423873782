"""Concentration functions of a signed walk, and the small-ball threshold.

rho(v) is the largest atom of sum eps_i v_i; the Erdos bound caps it by
2^-n binom(n, n/2) whenever every coordinate is nonzero, with equality at the
all-ones vector.  The threshold T_L(v) is the largest scale t at which
P(||Mv|| <= t sqrt(n)) still beats (4Lt)^n for the zeroed block matrix M; we
bracket it with CI-aware probing and feed the bracket to the rho_eps
comparison used to relate the two worlds.
"""

import numpy as np

from siglab import SeedSpec, rho_eps_exact, rho_exact, threshold_estimate
from siglab.rng import Stream

print("atoms of small walks:")
print("  rho((1,1,1,1))        =", rho_exact([1, 1, 1, 1]))
print("  rho_eps((1,1,1,1),1.5) =", rho_eps_exact([1, 1, 1, 1], 1.5))
ones = np.ones(10)
print("  rho(all-ones, n=10)   =", rho_exact(ones), " (Erdos bound, equality)")

stream = Stream(SeedSpec(2, "demo"))
v = stream.normals(10)
v /= np.linalg.norm(v)
print("\nbracketing T_L(v) for a random unit v at n=10, d=2, L=2:")
th = threshold_estimate(v, L=2.0, n=10, d=2, budget=40_000, seed=SeedSpec(2, "th"))
print(f"  T_L in [{th.t_low:.5f}, {th.t_high:.5f}]  ({th.samples} norm samples)")

eps = th.t_low
lhs = rho_eps_exact(v, eps) ** 4
rhs = 2**12 * 2.0 * th.t_high
print(f"  rho_eps(v)^4 = {lhs:.3g}  <=  2^12 L t_high = {rhs:.1f}")
