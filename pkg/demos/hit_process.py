"""
Hits of one orbit on a cusp section
===================================

Every excursion of the horocycle orbit above height e^R is one hit.  A hit
carries its time xi, its impact parameters (s, t) and the half-duration
delta = sqrt(e^t - 1) spent above the threshold.  The brute-force oracle
finds the same peaks by maximising the height directly.
"""

import numpy as np

from horoxt import mc
from horoxt.section import OrbitSpec, direct_crossing_oracle, hit_process, sup_excursion

g0 = mc.sample_initial(mc.SamplerSpec(seed=2024), 0)
spec = OrbitSpec(g0, R=0.0, T=60.0)

hits = hit_process(spec)
print(f"{len(hits)} hits on [0, {spec.T:g}]")
print("  j     xi        s        t     delta   (c, d)")
for h in hits:
    print(f"{h.j:3d} {h.xi:8.4f} {h.s:8.4f} {h.t:8.4f} {h.delta:7.4f}   ({h.vector.c}, {h.vector.d})")

oracle = direct_crossing_oracle(spec)
dxi = max(abs(a.xi - b.xi) for a, b in zip(hits, oracle))
print(f"\noracle found {len(oracle)} hits, largest time difference {dxi:.2e}")

# the gaps between hits average pi^2/3 on long orbits
gaps = np.diff([h.xi for h in hit_process(OrbitSpec(g0, 0.0, 5000.0))])
print("mean gap on [0, 5000]:", gaps.mean(), " pi^2/3 =", np.pi**2 / 3)

best, when = sup_excursion(spec)
print(f"highest point: height {best:.4f} at time {when:.4f}")
