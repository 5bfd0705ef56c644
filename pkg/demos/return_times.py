"""
Return times to the section
===========================

Start on the section with impact parameters drawn from its natural measure
(s uniform, t exponential) and flow to the next hit.  Kac's formula gives the
mean return time pi^2/3, and the backward return time has tail
(pi^2/3) Psi(r).
"""

import numpy as np

from horoxt import dist, mc
from horoxt.section import section_return_times

n = 200_000
s, t = mc.sample_nu(n, seed=0)
fwd = section_return_times(s, t)
back = section_return_times(s, t, backward=True)

print(f"mean forward return {fwd.mean():.4f}, backward {back.mean():.4f}, pi^2/3 = {dist.ETA_BAR:.4f}")
print("shortest return:", fwd.min())

r = np.array([0.5, 1.5, 2.0, 3.0, 4.0, 6.0, 10.0])
est = mc.psi_from_indicator(r, n, seed=0)
print("\n   r    estimate    hall_psi")
for x, e, a in zip(r, est, dist.hall_psi(r)):
    print(f"{x:5g}   {e:.6f}    {a:.6f}")
