"""Hit process of an unstable horocycle orbit against the cusp section.

The orbit is ``s -> Gamma g0 h+_s``.  The excursion labelled by a primitive
``v = (c, d)`` has height ``-log((P - s Q)^2 + Q^2)`` where ``(P, Q) = v g0``,
so it peaks at ``s = P / Q`` with height ``-2 log|Q|``.  Rescaling by
``M = g0 diag(e^{-R/2}, e^{R/2})`` turns "peak in (0, T] with height >= R"
into "``u = v M`` lies in the triangle ``Delta_{T e^{-R}}``", which is what
:func:`hit_arrays` enumerates.  :func:`direct_crossing_oracle` recomputes
the same hits without the triangle by scanning heights along the orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ConvergenceError, DomainError, HorizonError
from .lattice import (DEFAULT_CAP, PrimitiveVector, Region, complete_coset_arrays,
                      polygon_points, shortest_norm_sq, triangle_points)
from .sl2core import GroupElement, asz_encode, ASZCoords

MAX_APERTURE = 1e9
ORACLE_MAX_APERTURE = 1e3
ON_SECTION_TOL = 1e-8
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class HitEvent:
    j: int
    xi: float
    s: float
    t: float
    xi_entry: float
    delta: float
    vector: PrimitiveVector


@dataclass(frozen=True)
class OrbitSpec:
    g0: GroupElement
    R: float
    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError("time horizon T must be positive")
        if not math.isfinite(self.R):
            raise DomainError("section parameter R must be finite")
        if not self.T * math.exp(-self.R) <= MAX_APERTURE:
            raise CapacityError("T e^{-R} exceeds the enumeration cap 1e9")

    @property
    def aperture(self) -> float:
        return self.T * math.exp(-self.R)


def deformed_matrix(g0: GroupElement, R: float) -> np.ndarray:
    e, f = math.exp(-R / 2), math.exp(R / 2)
    return np.array([[g0.a * e, g0.b * f], [g0.c * e, g0.d * f]])


def sejour(t):
    """Half-duration ``sqrt(e^t - 1)`` of an excursion of relative height ``t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("sejour needs t >= 0")
    out = np.sqrt(np.expm1(t))
    return float(out) if out.ndim == 0 else out


def impact_s(g0: GroupElement, c, d, xi, check: bool = True) -> np.ndarray:
    """Horizontal impact of each hit, read off ``gamma g0 nbar(-xi)``.

    Also checks that the matrix sits on the section (vanishing ``r``).
    """
    c = np.asarray(c, dtype=np.int64)
    d = np.asarray(d, dtype=np.int64)
    a, b = complete_coset_arrays(c, d)
    P = c * g0.a + d * g0.c
    Q = c * g0.b + d * g0.d
    Qtop = a * g0.b + b * g0.d
    sign = np.where(Q < 0, -1.0, 1.0)
    r = (P - xi * Q) / Q
    if check and np.any(np.abs(r) > ON_SECTION_TOL * np.maximum(1.0, np.abs(xi))):
        raise ConvergenceError("hit does not lie on the section (r-coordinate non-zero)")
    s = (sign * Qtop) / (sign * Q)
    return np.mod(s, 1.0)


def hit_arrays(g0: GroupElement, R: float, T: float, with_s: bool = True,
               cap: int = DEFAULT_CAP) -> dict:
    """Columnar hit process: integer labels ``c, d`` and float ``xi, t, delta, s``."""
    X = T * math.exp(-R)
    if not X > 0:
        raise DomainError("T must be positive")
    if X > MAX_APERTURE:
        raise CapacityError("T e^{-R} exceeds the enumeration cap 1e9")
    V, U = triangle_points(deformed_matrix(g0, R), X, cap)
    u1, u2 = U[:, 0], U[:, 1]
    xi = math.exp(R) * (u1 / u2)
    t = np.maximum(-2.0 * np.log(u2), 0.0)
    delta = np.sqrt(np.expm1(t))
    out = dict(c=V[:, 0], d=V[:, 1], xi=xi, t=t, delta=delta, xi_entry=xi - delta)
    if with_s:
        out["s"] = impact_s(g0, V[:, 0], V[:, 1], xi) if len(xi) else np.zeros(0)
    return out


def _events(h: dict) -> list[HitEvent]:
    return [HitEvent(j + 1, float(h["xi"][j]), float(h["s"][j]), float(h["t"][j]),
                     float(h["xi_entry"][j]), float(h["delta"][j]),
                     PrimitiveVector(int(h["c"][j]), int(h["d"][j])))
            for j in range(len(h["xi"]))]


def hit_process(spec: OrbitSpec, cap: int = DEFAULT_CAP) -> list[HitEvent]:
    """All hits with ``0 < xi <= T``, in time order."""
    return _events(hit_arrays(spec.g0, spec.R, spec.T, cap=cap))


# -- heights ----------------------------------------------------------------

def _orbit_rows(g0: GroupElement, s) -> np.ndarray:
    # rows of g0 nbar(-s): (a - s b, b), (c - s d, d)
    s = np.asarray(s, dtype=float)
    rows = np.empty(s.shape + (2, 2))
    rows[..., 0, 0] = g0.a - s * g0.b
    rows[..., 0, 1] = g0.b
    rows[..., 1, 0] = g0.c - s * g0.d
    rows[..., 1, 1] = g0.d
    return rows


def heights_along(g0: GroupElement, s) -> np.ndarray:
    """Absolute cusp height ``max_gamma log Im(gamma z(s))`` at each time in ``s``."""
    return -np.log(shortest_norm_sq(_orbit_rows(g0, s)))


def height_at_time(g0: GroupElement, s: float) -> float:
    return float(heights_along(g0, np.asarray(float(s))))


def sup_excursion(spec: OrbitSpec) -> tuple[float, float]:
    """``(sup height, time attaining it)`` over ``s`` in ``[0, T]``.

    Heights below the endpoint values cannot win, so interior peaks are
    enumerated against a section placed at the larger endpoint height.
    """
    g0, T = spec.g0, spec.T
    ends = heights_along(g0, np.array([0.0, T]))
    best, arg = (float(ends[0]) + 0.0, 0.0) if ends[0] >= ends[1] else (float(ends[1]), T)
    level = best
    if T * math.exp(-level) > MAX_APERTURE:
        raise CapacityError("horizon too long for the enumeration cap")
    h = hit_arrays(g0, level, T, with_s=False)
    if len(h["t"]):
        k = int(np.argmax(h["t"]))
        # absolute height from the vector itself, so the value does not depend on level
        q = h["c"][k] * g0.b + h["d"][k] * g0.d
        peak = -2.0 * math.log(abs(float(q)))
        if peak > best:
            best, arg = peak, float(h["xi"][k])
    return best, arg


def sup_excursion_height(spec: OrbitSpec) -> float:
    return sup_excursion(spec)[0]


def sup_peak_height(g0: GroupElement, T: float) -> float:
    """Largest peak among excursions reaching the length-one horocycle, ``-inf`` if none."""
    h = hit_arrays(g0, 0.0, T, with_s=False)
    return float(h["t"].max()) if len(h["t"]) else -math.inf


# -- first hits and returns -------------------------------------------------

def _first_in_strip(M: np.ndarray, X0: float, X_max: float, backward: bool = False) -> float:
    """Smallest ``|u1|/u2`` over primitive points with ``u`` in the forward or backward strip."""
    X = X0
    while X <= X_max:
        _, U = triangle_points(M, -X if backward else X)
        if len(U):
            return float(np.min(np.abs(U[:, 0]) / U[:, 1]))
        X *= 2.0
    raise HorizonError(f"no hit within aperture {X_max:g}")


def first_hit_time(g0: GroupElement, R: float, X_max: float = MAX_APERTURE) -> float:
    """``xi_1``: time of the first peak in ``(0, inf)`` reaching height ``R``."""
    return math.exp(R) * _first_in_strip(deformed_matrix(g0, R), 4.0, X_max)


def last_hit_time(g0: GroupElement, R: float, X_max: float = MAX_APERTURE) -> float:
    """Time since the most recent peak in ``(-inf, 0)`` reaching height ``R``."""
    return math.exp(R) * _first_in_strip(deformed_matrix(g0, R), 4.0, X_max, backward=True)


def first_entry_time(g0: GroupElement, R: float, X_max: float = MAX_APERTURE) -> float:
    """First ``s >= 0`` at which the orbit is at height ``>= R``.

    An excursion peaking at ``xi`` enters at ``xi - delta``; in deformed
    coordinates that is ``u1 - e^{-R} sqrt(1 - u2^2) <= X u2``, which is
    searched inside the polygon ``0 < u2 <= 1, 0 < u1 <= X u2 + e^{-R}``.
    """
    if height_at_time(g0, 0.0) >= R:
        return 0.0
    M = deformed_matrix(g0, R)
    m = math.exp(-R)
    X = 4.0
    while X <= X_max:
        poly = np.array([[0.0, 0.0], [m, 0.0], [X + m, 1.0], [0.0, 1.0]])
        region = Region(
            lambda u1, u2, X=X: (u1 > 0) & (u2 > 0) & (u2 <= 1)
            & (u1 - m * np.sqrt(np.maximum(1.0 - u2 * u2, 0.0)) <= X * u2),
            poly, 0.5 * X + m)
        _, U = polygon_points(M, region)
        if len(U):
            u1, u2 = U[:, 0], U[:, 1]
            s_in = (u1 - m * np.sqrt(np.maximum(1.0 - u2 * u2, 0.0))) / u2
            return float(math.exp(R) * np.min(s_in))
        X *= 2.0
    raise HorizonError(f"no entry within aperture {X_max:g}")


def section_point(s: float, t: float, R: float = 0.0) -> GroupElement:
    """The section element with impact ``(s, t)`` above level ``R``."""
    return asz_encode(ASZCoords(0.0, s, t + R))


def return_time_forward(w, R: float = 0.0, X_max: float = MAX_APERTURE) -> float:
    s, t = w
    if t < 0:
        raise DomainError("impact height t must be >= 0")
    return first_hit_time(section_point(s, t, R), R, X_max)


def return_time_backward(w, R: float = 0.0, X_max: float = MAX_APERTURE) -> float:
    s, t = w
    if t < 0:
        raise DomainError("impact height t must be >= 0")
    return last_hit_time(section_point(s, t, R), R, X_max)


# -- independent oracle -----------------------------------------------------

def _golden_max(f, lo: np.ndarray, hi: np.ndarray, iters: int = 80) -> np.ndarray:
    """Vectorised golden-section search for the maximiser of unimodal ``f`` on each bracket."""
    a, b = lo.copy(), hi.copy()
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        left = f1 >= f2
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        x_new = np.where(left, b - _GOLDEN * (b - a), a + _GOLDEN * (b - a))
        f_new = f(x_new)
        x1, x2 = np.where(left, x_new, x2), np.where(left, x1, x_new)
        f1, f2 = np.where(left, f_new, f2), np.where(left, f1, f_new)
        if np.all(b - a < 1e-13 * np.maximum(1.0, np.abs(a))):
            break
    return 0.5 * (a + b)


def direct_crossing_oracle(spec: OrbitSpec, step: float = 0.05) -> list[HitEvent]:
    """Hits recomputed by maximising ``Im(gamma z(s))`` along the orbit, one coset at a time.

    Candidate bottom rows ``(c, d)`` come from a brute-force box large enough
    to hold every vector whose excursion reaches height ``R`` during ``[0, T]``.
    """
    g0, R, T = spec.g0, spec.R, spec.T
    if spec.aperture > ORACLE_MAX_APERTURE:
        raise DomainError("oracle limited to T e^{-R} <= 1e3")
    # a peak of height >= R inside [0, T] needs (P, Q) = v g0 in
    # [-m, (T + 1) m] x (0, m], m = e^{-R/2}; scan the integer box around its preimage
    m = math.exp(-R / 2)
    corners = np.array([[-m, 0.0], [(T + 1) * m, 0.0], [-m, m], [(T + 1) * m, m]])
    pre = corners @ g0.inverse().to_array()
    lo = np.floor(pre.min(axis=0)).astype(np.int64) - 1
    hi = np.ceil(pre.max(axis=0)).astype(np.int64) + 1
    cc, dd = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    cc, dd = cc.ravel(), dd.ravel()
    Q = cc * g0.b + dd * g0.d
    keep = (Q > 0) & (Q * Q <= math.exp(-R)) & (np.gcd(cc, dd) == 1)
    cc, dd = cc[keep], dd[keep]
    P = cc * g0.a + dd * g0.c
    Q = Q[keep]
    if not len(cc):
        return []

    def height(k, s):
        # log Im(gamma z(s)) for candidate k at times s
        return -np.log((P[k] - s * Q[k]) ** 2 + Q[k] ** 2)

    n = int(math.ceil((T + 2.0) / step)) + 1
    grid = np.linspace(-1.0, T + 1.0, n)
    H = -np.log((P[:, None] - grid[None, :] * Q[:, None]) ** 2 + (Q * Q)[:, None])
    inner = (H[:, 1:-1] >= H[:, :-2]) & (H[:, 1:-1] > H[:, 2:])
    ks, js = np.nonzero(inner)
    js = js + 1
    if not len(ks):
        return []
    s_star = _golden_max(lambda s: height(ks, s), grid[js - 1], grid[js + 1])
    h_star = height(ks, s_star)
    hit = (s_star > 0) & (s_star <= T) & (h_star >= R)
    ks, s_star, h_star = ks[hit], s_star[hit], h_star[hit]
    order = np.lexsort((dd[ks], cc[ks], s_star))
    ks, xi, t = ks[order], s_star[order], np.maximum(h_star[order] - R, 0.0)
    delta = np.sqrt(np.expm1(t))
    out = dict(c=cc[ks], d=dd[ks], xi=xi, t=t, delta=delta, xi_entry=xi - delta)
    # peak times here are only good to ~1e-8, below the on-section tolerance
    out["s"] = impact_s(g0, out["c"], out["d"], xi, check=False) if len(xi) else np.zeros(0)
    return _events(out)


def section_return_times(s, t, R: float = 0.0, backward: bool = False,
                         max_c: int = 10**9) -> np.ndarray:
    """Vectorised :func:`return_time_forward` / :func:`return_time_backward`.

    From a section point the deformed lattice is upper triangular, so for
    each ``c >= 1`` the best partner is the largest ``d`` coprime to ``c``
    with ``0 < c s + d <= e^{t/2}``, giving time ``c e^t / (c s + d)``.
    Every label with first entry ``c`` needs at least ``c e^{t/2}``, which
    bounds the scan.  Going backwards is the same with ``s -> -s``.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise DomainError("impact height t must be >= 0")
    if backward:
        s = -s
    s, t = np.broadcast_arrays(s, t)
    s, t = s.ravel(), t.ravel()
    half = np.exp(t / 2)
    best = np.full(s.shape, np.inf)
    idx = np.arange(len(s))
    c = 1
    while len(idx):
        if c > max_c:
            raise HorizonError("return time search exceeded the label cap")
        cs = c * s[idx]
        d = np.floor(half[idx] - cs)
        ok = cs + d > 0
        # step down to the nearest d coprime to c while staying above -c s
        bad = ok & (np.gcd(np.int64(c), d.astype(np.int64)) != 1)
        while bad.any():
            d[bad] -= 1
            ok &= cs + d > 0
            bad = ok & (np.gcd(np.int64(c), d.astype(np.int64)) != 1)
        val = np.where(ok, c * np.exp(t[idx]) / np.where(ok, cs + d, 1.0), np.inf)
        best[idx] = np.minimum(best[idx], val)
        c += 1
        idx = idx[c * half[idx] < best[idx]]
    out = math.exp(R) * best
    return out
