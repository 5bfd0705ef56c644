"""
Farey gaps and the Hall density
===============================

Consecutive fractions p/q < p'/q' in the Farey sequence of order Q sit
1/(q q') apart.  Scaled by Q^2 these gaps follow the Hall law, the same law
as first hitting times of a shrinking cusp section.
"""

import numpy as np

from horoxt import dist, mc

Q = 2000
gaps = mc.farey_gap_oracle(Q)
print(f"order {Q}: {gaps.n} gaps, mean scaled gap {gaps.mean():.5f} (pi^2/3 = {dist.ETA_BAR:.5f})")

r = np.array([0.5, 1, 2, 4, 8, 16, 32])
print("\n   r     P(gap > r)   (pi^2/3) Psi(r)")
for x, e, a in zip(r, gaps.sf(r), 1 - mc.farey_tail_cdf(r)):
    print(f"{x:5g}   {e:.6f}     {a:.6f}")
print("\nsup error:", mc.ks_distance(gaps, mc.farey_tail_cdf))

# first hits of Haar-random orbits, scaled by e^-R, share the law Psi
R = 6.0
first = mc.experiment_first_hit(mc.SamplerSpec(seed=3), R, 2000)
print(f"first hit times at R={R:g}: KS to Hall = {mc.ks_distance(first, dist.hall_cdf):.4f}")
