"""Nets for structured vectors: the trivial lattice net, rounding, covers.

Lambda_eps is the intersection of the radius-2 ball, the step lattice
4 eps n^{-1/2} Z^n and a flat window on the first d coordinates.  We count it
exactly by dynamic programming, sample it uniformly, round sphere vectors
onto it with mean-zero randomized rounding, and cover its integer rescaling
by the dyadic-level box family.
"""

import numpy as np

from siglab import SeedSpec
from siglab.nets import (
    LatticeCounter,
    TrivialNetSpec,
    build_box_cover,
    flat_window_vector,
    lambda_membership,
    round_vector_to_net,
)

K0, K1 = 0.5, 2.0
n, d, eps = 12, 2, 0.05  # eps must sit strictly below kappa0 / 8
spec = TrivialNetSpec(n=n, eps=eps, kappa0=K0, kappa1=K1, d=d)
counter = LatticeCounter(spec)
print(f"|Lambda_eps| at n={n}, d={d}, eps={eps}: {counter.count():,} points (exact)")

pts = counter.sample(3, SeedSpec(5, "pick"))
cover = build_box_cover(n=n, d=d, eps=eps, kappa0=K0, kappa1=K1)
print(f"cover family size (DP count): {cover.family_size():,}")
for row in pts:
    levels = cover.cover_lookup(row)
    print(f"  sample {row.tolist()} -> box levels {levels}")

v = flat_window_vector(n, d, K0, K1, SeedSpec(5, "v"))
u, r = round_vector_to_net(v, eps, SeedSpec(5, "r"), spec)
print(
    f"\nrounded a flat sphere vector onto the net: ||u - v||_inf = "
    f"{np.max(np.abs(r)):.5f} <= 4 eps/sqrt(n) = {4 * eps / np.sqrt(n):.5f}; "
    f"member = {lambda_membership(u, spec)}"
)
