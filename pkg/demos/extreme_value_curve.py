"""
Extreme excursions into the cusp
================================

Walk along a long horocycle on the modular surface and record the highest
point reached.  After subtracting log T the height settles into a fixed law
with density rho.  This script tabulates rho and compares it with a small
simulation.
"""

import math

import numpy as np

from horoxt import dist, mc

# the limit density, on the grid a plot would use
s = np.arange(-6, 4.001, 0.5)
print("   s       rho(s)")
for x, y in zip(s, dist.rho(s)):
    print(f"{x:6.2f}  {y:.6f}")

# the mean is a closed form in zeta(3)
print("\nmean of rho:", dist.rho_moment(1), "closed form:", 1 - 12 / math.pi**2 * dist.ZETA3)

# simulate: Haar-random starting points, horocycle of length T
T, n = 200.0, 2000
emp = mc.experiment_extreme(mc.SamplerSpec(seed=1), T, n)
print(f"\n{n} orbits of length {T:g}: KS distance to rho = {mc.ks_distance(emp, dist.rho_cdf):.4f}")

# a coarse histogram next to the density
edges = np.arange(-3, 4.01, 0.5)
counts, _ = np.histogram(emp.samples, edges)
mid = 0.5 * (edges[1:] + edges[:-1])
print("\n  bin    empirical  rho")
for m, c in zip(mid, counts):
    print(f"{m:5.2f}   {c / n / 0.5:.4f}    {dist.rho(m):.4f}")
