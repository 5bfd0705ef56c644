"""Verification suites shared by the command line and the acceptance tests.

Each suite returns a list of :class:`Check` records with the target value,
what was observed and the tolerance applied.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import dist, mc
from .lattice import triangle_region, unit_disk
from .section import OrbitSpec, direct_crossing_oracle, hit_arrays, hit_process
from .sl2core import geodesic_flow

KS_TOL = 0.02
KS_TOL_ESCALATED = 0.01


@dataclass
class Check:
    name: str
    target: float
    observed: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return asdict(self)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"{flag} {self.name}: observed={self.observed:.10g} "
                f"target={self.target:.10g} tol={self.tolerance:.3g}")


def _abs(name, observed, target, tol) -> Check:
    observed = float(observed)
    return Check(name, float(target), observed, tol, bool(abs(observed - target) <= tol))


def _rel(name, observed, target, tol) -> Check:
    observed = float(observed)
    return Check(name, float(target), observed, tol,
                 bool(abs(observed / target - 1.0) <= tol))


def _upper(name, observed, bound) -> Check:
    observed = float(observed)
    return Check(name, float(bound), observed, 0.0, bool(observed <= bound))


def _ks_escalating(name, run, cdf, n) -> list[Check]:
    """KS against ``cdf``; a miss at ``n`` is rerun at ``10 n`` with the tighter bound."""
    ks = mc.ks_distance(run(n), cdf)
    first = _upper(f"{name} KS (n={n})", ks, KS_TOL)
    if first.passed:
        return [first]
    ks = mc.ks_distance(run(10 * n), cdf)
    return [first, _upper(f"{name} KS escalated (n={10 * n})", ks, KS_TOL_ESCALATED)]


# -- suites ---------------------------------------------------------------------

def exact_value_checks() -> list[Check]:
    c = dist.C_HALL
    ln2 = math.log(2.0)
    flat = np.linspace(0.0, 0.999, 1000)
    return [
        _abs("hall_psi flat on [0,1)", np.max(np.abs(dist.hall_psi(flat) - c)), 0.0, 1e-15),
        _abs("hall_psi(0.5)", dist.hall_psi(0.5), c, 1e-15),
        _abs("hall_psi(2)", dist.hall_psi(2.0), c * ln2, 1e-12),
        _abs("rho(0)", dist.rho(0.0), c, 1e-15),
        _abs("rho(1)", dist.rho(1.0), c * math.exp(-1.0), 1e-15),
        # adjacent branch formulas evaluated at the shared edge
        _abs("hall_psi continuity at 1", dist._psi_mid(1.0), 1.0, 1e-12),
        _abs("hall_psi continuity at 4", dist._psi_high(4.0), dist._psi_mid(4.0), 1e-12),
        _abs("hall_psi(4)", dist.hall_psi(4.0), c * (-0.5 + ln2), 1e-12),
        _abs("rho continuity at 0", dist.rho(-1e-300), dist.rho(0.0), 1e-12),
        _abs("rho continuity at -2 log 2",
             dist.rho(-2 * ln2 - 1e-15), dist.rho(-2 * ln2), 1e-12),
        _abs("rho(-2 log 2)", dist.rho(-2 * ln2), c * (-4.0 + 2.0 + 4.0 * ln2), 1e-12),
        _abs("integral of hall_psi", dist.psi_total(), 1.0, 1e-8),
        _abs("integral of rho", dist.rho_total(), 1.0, 1e-8),
        _abs("mean return time", dist.eta_bar_multi([0.0], dist.VOL_MODULAR), math.pi**2 / 3, 1e-12),
        _abs("hit intensity", 1.0 / dist.eta_bar_multi([0.0], dist.VOL_MODULAR), 3 / math.pi**2, 1e-12),
    ]


def moment_checks() -> list[Check]:
    ln2 = math.log(2.0)
    return [
        _abs("mean of rho", dist.rho_moment(1), dist.RHO_MEAN, 1e-5),
        _abs("mean of rho (printed)", dist.rho_moment(1), -0.46153, 1e-5),
        _abs("integral of eta_log", dist.quad_pieces(dist.eta_log, (0.0, ln2)), 1.0, 1e-8),
    ]


def tail_checks() -> list[Check]:
    out = [
        _abs("tail ratio r=100", dist.tail_ratio(100.0), 1.0, 0.02),
        _abs("tail ratio r=1e4", dist.tail_ratio(1e4), 1.0, 0.001),
    ]
    lo, hi = dist.sandwich_constants(lambda r: dist.hall_psi(r) * r * r,
                                     np.geomspace(1.0, 1e4, 20001))
    out.append(Check(f"tail sandwich on [1,1e4], c2={hi:.6g}", 0.0, lo, 0.0,
                     bool(0 < lo < hi < math.inf)))
    lo, hi = dist.sandwich_constants(lambda s: dist.rho(s) * np.exp(np.abs(s)),
                                     np.linspace(-20, 20, 40001))
    out.append(Check(f"rho sandwich on [-20,20], C2={hi:.6g}", 0.0, lo, 0.0,
                     bool(0 < lo < hi < math.inf)))
    return out


def marginal_checks() -> list[Check]:
    return [_abs(f"marginal of psi(r,t) at r={r:g}", dist.psi_rt_marginal(r),
                 dist.hall_psi(r), 1e-8) for r in (0.5, 2.0, 4.0, 10.0)]


def constants_suite() -> list[Check]:
    return exact_value_checks() + moment_checks() + tail_checks() + marginal_checks()


def oracle_suite(n: int = 50, seed: int = 0, T: float = 20.0, R: float = 0.0) -> list[Check]:
    spec = mc.SamplerSpec(seed=seed)
    count_bad, dxi, dt = 0, 0.0, 0.0
    for i in range(n):
        orbit = OrbitSpec(mc.sample_initial(spec, i), R, T)
        a, b = hit_process(orbit), direct_crossing_oracle(orbit)
        if len(a) != len(b):
            count_bad += 1
            continue
        for x, y in zip(a, b):
            dxi = max(dxi, abs(x.xi - y.xi))
            dt = max(dt, abs(x.t - y.t))
    return [
        _abs(f"orbits with mismatched hit count (of {n})", count_bad, 0, 0),
        _upper("max hit time difference", dxi, 1e-7),
        _upper("max hit height difference", dt, 1e-7),
    ]


def scaling_suite(n: int = 20, seed: int = 0, T: float = 20.0) -> list[Check]:
    spec = mc.SamplerSpec(seed=seed)
    bad, dxi = 0, 0.0
    for i in range(n):
        g = mc.sample_initial(spec, i)
        for R in (1.0, 2.0):
            a = hit_arrays(g, R, T)
            b = hit_arrays(geodesic_flow(g, -R), 0.0, T * math.exp(-R))
            la = set(zip(a["c"].tolist(), a["d"].tolist()))
            lb = set(zip(b["c"].tolist(), b["d"].tolist()))
            if la != lb or not np.allclose(a["t"], b["t"], rtol=0, atol=1e-9):
                bad += 1
                continue
            if len(a["xi"]):
                dxi = max(dxi, float(np.max(np.abs(a["xi"] - math.exp(R) * b["xi"]))))
    return [_abs(f"orbits with different labels (of {2 * n})", bad, 0, 0),
            _upper("max rescaled time difference", dxi, 1e-9)]


def farey_suite(Q: int = 2000) -> list[Check]:
    e = mc.farey_gap_oracle(Q)
    return [
        _upper("Farey tail sup-error", mc.ks_distance(e, mc.farey_tail_cdf), 0.01),
        _rel("Farey mean scaled gap", e.mean(), dist.ETA_BAR, 0.005),
        _abs("Farey minimum scaled gap", e.samples[0], Q / (Q - 1), 1e-12),
    ]


def siegel_suite(n: int = 10**4, seed: int = 0) -> list[Check]:
    tri, _ = mc.siegel_estimate(triangle_region(10.0), n, seed)
    disk, _ = mc.siegel_estimate(unit_disk(), n, seed + 1)
    small = triangle_region(0.1)
    _, hit = mc.siegel_estimate(small, n, seed + 2)
    return [
        _rel("Siegel mean, triangle X=10", tri, dist.PRIMITIVE_DENSITY * 5.0, 0.02),
        _rel("Siegel mean, unit disk", disk, dist.PRIMITIVE_DENSITY * math.pi, 0.02),
        _upper("Markov bound, area 0.05", hit, dist.PRIMITIVE_DENSITY * small.area + 0.02),
    ]


def extreme_suite(n: int = 10**4, seed: int = 0, T: float = 1e3) -> list[Check]:
    haar = mc.SamplerSpec(seed=seed)
    seg = mc.segment_spec(seed=seed)
    out = []
    out += _ks_escalating("sup height, Haar start",
                          lambda k: mc.experiment_extreme(haar, T, k), dist.rho_cdf, n)
    out += _ks_escalating("sup height, horocycle segment start",
                          lambda k: mc.experiment_extreme(seg, T, k), dist.rho_cdf, n)
    out += _ks_escalating("sup over peaks only, Haar start",
                          lambda k: mc.experiment_extreme(haar, T, k, "peaks"), dist.rho_cdf, n)
    d, gap = mc.experiment_distance(haar, T, n)
    out.append(_upper(f"sup distance to i, Haar start KS (n={n})", mc.ks_distance(d, dist.rho_cdf), 0.03))
    out.append(_upper("distance minus height, scaled by e^height", gap, 1.0))
    return out


def firsthit_suite(n: int = 10**4, seed: int = 0, R: float = 6.0) -> list[Check]:
    haar = mc.SamplerSpec(seed=seed)
    out = []
    out += _ks_escalating(f"first hit time, R={R:g}",
                          lambda k: mc.experiment_first_hit(haar, R, k), dist.hall_cdf, n)
    out += _ks_escalating(f"first entry time, R={R:g}",
                          lambda k: mc.experiment_first_hit(haar, R, k, "entry"), dist.hall_cdf, n)

    def stability(k):
        a = mc.experiment_first_hit(mc.SamplerSpec(seed=seed + 1), 5.0, k)
        b = mc.experiment_first_hit(mc.SamplerSpec(seed=seed + 2), 8.0, k)
        return mc.ks_two_sample(a, b)

    ks = stability(n)
    out.append(_upper(f"R=5 vs R=8 two-sample KS (n={n})", ks, KS_TOL))
    if not out[-1].passed:
        out.append(_upper(f"R=5 vs R=8 escalated (n={10 * n})", stability(10 * n), KS_TOL_ESCALATED))
    return out


def kac_suite(n: int = 10**6, seed: int = 0, n_haar: int = 10**4, X: float = 50.0) -> list[Check]:
    low = mc.minimal_return(min(n, 10**4), seed)
    return [
        _rel(f"mean return time (n={n})", mc.kac_mean(n, seed), dist.ETA_BAR, 0.01),
        Check("minimal return time", 1.0, low, 1e-9, bool(low >= 1.0 - 1e-9)),
        _rel(f"hit intensity X={X:g} (n={n_haar})",
             mc.hit_intensity(mc.SamplerSpec(seed=seed), X, n_haar), dist.C_HALL, 0.02),
    ]


def indicator_suite(n: int = 10**6, seed: int = 0) -> list[Check]:
    rs = np.array([0.5, 2.0, 4.0, 10.0])
    est = mc.psi_from_indicator(rs, n, seed)
    out = [_rel(f"P(backward return > {r:g}) / mean return (n={n})", e, dist.hall_psi(r), 0.02)
           for r, e in zip(rs, est)]
    return out + marginal_checks()


SUITES = {
    "constants": constants_suite,
    "oracle": oracle_suite,
    "scaling": scaling_suite,
    "farey": farey_suite,
    "siegel": siegel_suite,
    "extreme": extreme_suite,
    "firsthit": firsthit_suite,
    "kac": kac_suite,
    "indicator": indicator_suite,
}


def suite_passed(checks: list[Check]) -> bool:
    """Escalated KS pairs count as passed when the rerun passes."""
    ok = True
    i = 0
    while i < len(checks):
        c = checks[i]
        nxt = checks[i + 1] if i + 1 < len(checks) else None
        if not c.passed and nxt is not None and "escalated" in nxt.name:
            ok &= nxt.passed
            i += 2
            continue
        ok &= c.passed
        i += 1
    return bool(ok)
