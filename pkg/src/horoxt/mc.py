"""Monte-Carlo experiments for the cusp-excursion limit laws.

Every random quantity is a pure function of ``(seed, index)``: each sample
gets its own counter-based Philox stream keyed by ``(seed << 64) | index``,
so results do not depend on chunking or on the number of worker processes
(``HOROXT_THREADS``).
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np

from . import dist
from .errors import CapacityError, DomainError
from .lattice import Region, count_in_dilate, polygon_points, reduce_fundamental, triangle_points
from .section import (OrbitSpec, deformed_matrix, first_entry_time, first_hit_time,
                      section_return_times, sup_excursion, sup_peak_height)
from .sl2core import GroupElement, IwasawaCoords, base_point, geodesic_flow, iwasawa_encode

SQRT3_2 = math.sqrt(3.0) / 2
HAAR_ACCEPTANCE = (math.pi / 3) / (2 / math.sqrt(3.0))
CHUNK = 256
FAREY_MAX_Q = 10**5
_NU_STREAM = (1 << 64) - 1


# -- random streams -----------------------------------------------------------

def stream(seed: int, index: int) -> np.random.Generator:
    if not (0 <= seed < 1 << 64 and 0 <= index < 1 << 64):
        raise DomainError("seed and index must be unsigned 64-bit integers")
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(index)))


@dataclass(frozen=True)
class SamplerSpec:
    """``haar_fundamental`` or ``horocycle_segment`` (``base n(s)``, ``s ~ U(alpha, beta)``)."""

    kind: str = "haar_fundamental"
    seed: int = 0
    base: GroupElement = field(default_factory=GroupElement.identity)
    alpha: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in ("haar_fundamental", "horocycle_segment"):
            raise DomainError(f"unknown sampler kind {self.kind!r}")
        if self.kind == "horocycle_segment" and not self.alpha < self.beta:
            raise DomainError("segment sampler needs alpha < beta")

    def describe(self) -> dict:
        out = {"kind": self.kind, "seed": self.seed}
        if self.kind == "horocycle_segment":
            b = self.base
            out.update(base=[b.a, b.b, b.c, b.d], alpha=self.alpha, beta=self.beta)
        return out


def haar_draw(rng: np.random.Generator) -> tuple[float, float, float, int]:
    """``(u, v, theta, tries)`` Haar-distributed on the fundamental domain."""
    tries = 0
    while True:
        tries += 1
        u = rng.uniform(-0.5, 0.5)
        # density v^-2 on (sqrt3/2, inf) by inverse CDF
        v = SQRT3_2 / (1.0 - rng.random())
        if u * u + v * v >= 1.0:
            return u, v, rng.uniform(0.0, math.pi), tries


def sample_initial(spec: SamplerSpec, index: int) -> GroupElement:
    rng = stream(spec.seed, index)
    if spec.kind == "haar_fundamental":
        u, v, theta, _ = haar_draw(rng)
        return iwasawa_encode(IwasawaCoords(u, v, theta))
    s = rng.uniform(spec.alpha, spec.beta)
    b = spec.base
    return GroupElement(b.a, b.b + s * b.a, b.c, b.d + s * b.c)


def segment_spec(seed: int = 0, lift: float = 3.0, alpha: float = 0.0,
                 beta: float = 1.0) -> SamplerSpec:
    """Uniform measure on a piece of the stable horocycle through ``phi_lift(identity)``."""
    base = geodesic_flow(GroupElement.identity(), lift)
    return SamplerSpec("horocycle_segment", seed, base, alpha, beta)


def sample_nu(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Impact parameters ``(s, t)`` from the section measure: ``s`` uniform, ``t ~ Exp(1)``."""
    rng = stream(seed, _NU_STREAM)
    s = rng.random(n)
    t = rng.exponential(size=n)
    return s, t


# -- parallel map -------------------------------------------------------------

def worker_count() -> int:
    env = os.environ.get("HOROXT_THREADS", "").strip()
    if env:
        try:
            k = int(env)
        except ValueError as exc:
            raise DomainError("HOROXT_THREADS must be a positive integer") from exc
        if k < 1:
            raise DomainError("HOROXT_THREADS must be a positive integer")
        return k
    return os.cpu_count() or 1


def parallel_map(func, n: int, chunk: int = CHUNK, workers: int | None = None) -> np.ndarray:
    """Concatenate ``func(lo, hi)`` over fixed index chunks; order is by index."""
    bounds = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    if not bounds:
        return np.zeros(0)
    workers = worker_count() if workers is None else workers
    if workers == 1 or len(bounds) == 1:
        parts = [func(lo, hi) for lo, hi in bounds]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(bounds))) as ex:
            parts = list(ex.map(func, *zip(*bounds)))
    return np.concatenate([np.asarray(p, dtype=float) for p in parts])


# -- empirical distributions ---------------------------------------------------

class EmpiricalDistribution:
    def __init__(self, samples):
        self.samples = np.sort(np.asarray(samples, dtype=float).ravel())
        if not len(self.samples):
            raise DomainError("empirical distribution needs at least one sample")

    @property
    def n(self) -> int:
        return len(self.samples)

    def ecdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.searchsorted(self.samples, x, side="right") / self.n

    def sf(self, x):
        return 1.0 - self.ecdf(x)

    def mean(self) -> float:
        return float(self.samples.mean())

    def quantile(self, q):
        return np.quantile(self.samples, q)


def _as_vector_fn(cdf):
    def f(x):
        try:
            out = np.asarray(cdf(x), dtype=float)
            if out.shape == x.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(cdf(float(v))) for v in x])
    return f


def ks_distance(e: EmpiricalDistribution, cdf) -> float:
    """``sup |ECDF - cdf|`` using both one-sided limits at every jump."""
    x = e.samples
    F = _as_vector_fn(cdf)(x)
    above = np.searchsorted(x, x, side="right") / e.n - F
    below = F - np.searchsorted(x, x, side="left") / e.n
    return float(max(above.max(), below.max()))


def ks_two_sample(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    pts = np.concatenate([a.samples, b.samples])
    return float(np.max(np.abs(a.ecdf(pts) - b.ecdf(pts))))


@dataclass
class ExperimentReport:
    config: dict
    seed: int
    n: int
    ks: float
    grid: list
    wall_time: float = 0.0

    def to_dict(self, timing: bool = False) -> dict:
        out = asdict(self)
        if not timing:
            out.pop("wall_time")
        return out


def make_report(config: dict, seed: int, e: EmpiricalDistribution, cdf,
                grid=None, started: float | None = None) -> ExperimentReport:
    if grid is None:
        grid = e.quantile(np.linspace(0.05, 0.95, 19))
    grid = np.asarray(grid, dtype=float)
    F = _as_vector_fn(cdf)(grid)
    rows = [[float(x), float(y), float(z)] for x, y, z in zip(grid, e.ecdf(grid), F)]
    wall = time.perf_counter() - started if started is not None else 0.0
    return ExperimentReport(dict(config), seed, e.n, ks_distance(e, cdf), rows, wall)


# -- per-chunk workers (top level so they pickle) -----------------------------

def _extreme_chunk(spec, T, variant, lo, hi):
    out = np.empty(hi - lo)
    for k, i in enumerate(range(lo, hi)):
        g = sample_initial(spec, i)
        if variant == "peaks":
            h = sup_peak_height(g, T)
        else:
            h = sup_excursion(OrbitSpec(g, 0.0, T))[0]
        out[k] = h - math.log(T)
    return out


def _first_hit_chunk(spec, R, variant, lo, hi):
    out = np.empty(hi - lo)
    for k, i in enumerate(range(lo, hi)):
        g = sample_initial(spec, i)
        x = first_entry_time(g, R) if variant == "entry" else first_hit_time(g, R)
        out[k] = math.exp(-R) * x
    return out


def _distance_chunk(spec, T, lo, hi):
    out = np.empty((hi - lo, 2))
    for k, i in enumerate(range(lo, hi)):
        g = sample_initial(spec, i)
        h, s_star = sup_excursion(OrbitSpec(g, 0.0, T))
        out[k] = distance_to_i(_flow_point(g, s_star)), h
    return out.ravel()


def _hit_count_chunk(spec, X, lo, hi):
    out = np.empty(hi - lo)
    for k, i in enumerate(range(lo, hi)):
        g = sample_initial(spec, i)
        out[k] = len(triangle_points(deformed_matrix(g, 0.0), X)[0])
    return out


def _siegel_chunk(seed, region, lo, hi):
    spec = SamplerSpec("haar_fundamental", seed)
    out = np.empty(hi - lo)
    for k, i in enumerate(range(lo, hi)):
        g = sample_initial(spec, i)
        out[k] = count_in_dilate(g.to_array(), region, 1.0)
    return out


# -- experiments ----------------------------------------------------------------

def experiment_extreme(spec: SamplerSpec, T: float, n: int,
                       variant: str = "full", workers: int | None = None) -> EmpiricalDistribution:
    """Samples of ``sup height - log T`` along ``[0, T]``.

    ``variant="peaks"`` keeps only peaks of excursions reaching the length-one
    horocycle (``-inf`` if there are none).
    """
    if n < 1 or not T >= 1:
        raise DomainError("need n >= 1 and T >= 1")
    if variant not in ("full", "peaks"):
        raise DomainError(f"unknown variant {variant!r}")
    vals = parallel_map(partial(_extreme_chunk, spec, T, variant), n, workers=workers)
    return EmpiricalDistribution(vals)


def experiment_first_hit(spec: SamplerSpec, R: float, n: int,
                         variant: str = "hit", workers: int | None = None) -> EmpiricalDistribution:
    """Samples of ``e^{-R} xi_1`` (``variant="entry"``: first entry instead of first peak)."""
    if n < 1:
        raise DomainError("need n >= 1")
    if variant not in ("hit", "entry"):
        raise DomainError(f"unknown variant {variant!r}")
    vals = parallel_map(partial(_first_hit_chunk, spec, R, variant), n, workers=workers)
    return EmpiricalDistribution(vals)


def _flow_point(g: GroupElement, s: float) -> GroupElement:
    return GroupElement(g.a - s * g.b, g.b, g.c - s * g.d, g.d)


def distance_to_i(g: GroupElement) -> float:
    """Hyperbolic distance on the modular surface from ``i`` to the footpoint of ``g``."""
    _, gr = reduce_fundamental(g)
    z = base_point(gr)
    # the standard domain lies in the Voronoi cell of i among its Gamma-images
    return math.acosh(1.0 + (z.x * z.x + (z.y - 1.0) ** 2) / (2.0 * z.y))


def experiment_distance(spec: SamplerSpec, T: float, n: int,
                        workers: int | None = None) -> tuple[EmpiricalDistribution, float]:
    """Samples of ``dist(i, orbit point of maximal height) - log T``.

    Also returns the largest observed ``|distance - height| e^{height}``, which
    stays bounded because the two differ by ``O(e^{-height})``.
    """
    raw = parallel_map(partial(_distance_chunk, spec, T), n, workers=workers).reshape(-1, 2)
    d, h = raw[:, 0], raw[:, 1]
    gap = float(np.max(np.abs(d - h) * np.exp(h)))
    return EmpiricalDistribution(d - math.log(T)), gap


def hit_intensity(spec: SamplerSpec, X: float, n: int, workers: int | None = None) -> float:
    """Mean number of peaks above the length-one horocycle in ``(0, X]``, divided by ``X``."""
    counts = parallel_map(partial(_hit_count_chunk, spec, X), n, workers=workers)
    return float(counts.mean() / X)


def kac_mean(n: int, seed: int = 0, R: float = 0.0) -> float:
    """Average first return time from section points drawn from the section measure."""
    s, t = sample_nu(n, seed)
    return float(section_return_times(s, t, R).mean())


def psi_from_indicator(r, n: int, seed: int = 0) -> np.ndarray:
    """``P(eta_{-1} > r) / eta_bar`` over the section measure, an estimate of ``hall_psi(r)``."""
    s, t = sample_nu(n, seed)
    back = np.sort(section_return_times(s, t, backward=True))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    tail = 1.0 - np.searchsorted(back, r, side="right") / n
    return tail / dist.ETA_BAR


def minimal_return(n: int, seed: int = 0) -> float:
    s, t = sample_nu(n, seed)
    return float(section_return_times(s, t).min())


# -- Siegel identity ---------------------------------------------------------

def siegel_estimate(region: Region, n: int, seed: int = 0,
                    workers: int | None = None) -> tuple[float, float]:
    """``(mean count, P(count >= 1))`` of primitive points of a Haar-random lattice in ``region``."""
    counts = parallel_map(partial(_siegel_chunk, seed, region), n, workers=workers)
    return float(counts.mean()), float(np.mean(counts >= 1))


def siegel_check(region: Region, n: int, seed: int = 0, workers: int | None = None) -> float:
    """Monte-Carlo mean count minus its exact value ``(6/pi^2) area``."""
    mean, _ = siegel_estimate(region, n, seed, workers)
    return mean - dist.PRIMITIVE_DENSITY * region.area


# -- Farey gaps -----------------------------------------------------------------

def farey_denominators(Q: int) -> np.ndarray:
    """Denominators of the Farey sequence of order ``Q`` on ``[0, 1]``, in order."""
    if Q < 1:
        raise DomainError("Farey order must be >= 1")
    if Q > FAREY_MAX_Q:
        raise CapacityError(f"Farey order {Q} exceeds {FAREY_MAX_Q}")
    out = [1, Q]
    b, d = 1, Q
    while d != 1:
        k = (Q + b) // d
        b, d = d, k * d - b
        out.append(d)
    return np.array(out, dtype=np.int64)


def farey_gap_oracle(Q: int) -> EmpiricalDistribution:
    """All consecutive gaps of the Farey sequence of order ``Q`` on ``[0, 1)``, times ``Q^2``."""
    if Q < 100:
        raise DomainError("Farey order must be >= 100")
    den = farey_denominators(Q).astype(float)
    return EmpiricalDistribution(Q * Q / (den[:-1] * den[1:]))


def farey_tail_cdf(r):
    """CDF whose survival function is ``(pi^2/3) hall_psi(r)``."""
    r = np.maximum(np.asarray(r, dtype=float), 0.0)
    return 1.0 - dist.ETA_BAR * np.asarray(dist.hall_psi(r))


def primitive_fraction(N: int) -> float:
    """Fraction of pairs in ``[1, N]^2`` with coprime coordinates."""
    k = np.arange(1, N + 1, dtype=np.int64)
    return float(np.mean(np.gcd(k[:, None], k[None, :]) == 1))


def haar_acceptance(n: int, seed: int = 0) -> float:
    tries = 0
    for i in range(n):
        tries += haar_draw(stream(seed, i))[3]
    return n / tries


def meets_region(g: GroupElement, region: Region) -> bool:
    V, _ = polygon_points(g.to_array(), region)
    return len(V) > 0
