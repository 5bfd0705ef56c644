"""Arithmetic of SL(2,Z) and primitive lattice points in deformed lattices.

Cusp excursions of a horocycle orbit ``Gamma g0 h+_s`` are labelled by the
primitive integer vectors ``v = (c, d)``; the deformed vector ``u = v M`` with
``M = g0 diag(e^{-R/2}, e^{R/2})`` encodes the excursion as
``u = e^{-t/2} (r, 1)``.  Everything downstream reduces to listing primitive
``v`` with ``u`` inside a small convex region, which :func:`polygon_points`
does exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .errors import CapacityError, ConvergenceError, DomainError
from .sl2core import GroupElement, UpperHalfPoint, base_point

DEFAULT_CAP = 10**8
_CHUNK = 1 << 20
_MAX_REDUCE_ITER = 10**6


@dataclass(frozen=True)
class PrimitiveVector:
    c: int
    d: int

    def __post_init__(self):
        if not is_primitive(self.c, self.d):
            raise DomainError(f"({self.c}, {self.d}) is not primitive")


@dataclass(frozen=True)
class TriangleRegion:
    """``Delta_X`` for ``X > 0``; the backward triangle ``Delta_{-|X|}`` for ``X < 0``."""

    X: float

    def __post_init__(self):
        if self.X == 0 or not math.isfinite(self.X):
            raise DomainError("triangle aperture must be finite and non-zero")

    def contains(self, u1, u2):
        if self.X > 0:
            return (u1 > 0) & (u1 <= self.X * u2) & (u2 > 0) & (u2 <= 1)
        return (u1 < 0) & (u1 >= self.X * u2) & (u2 > 0) & (u2 <= 1)

    @property
    def vertices(self) -> np.ndarray:
        return np.array([[0.0, 0.0], [self.X, 1.0], [0.0, 1.0]])

    @property
    def area(self) -> float:
        return abs(self.X) / 2


@dataclass(frozen=True)
class Region:
    """A bounded region given by a vectorised membership test and a bounding polygon.

    ``vertices`` must describe a convex polygon containing the region.
    """

    contains: Callable
    vertices: np.ndarray
    area: float

    def dilate(self, T: float) -> "Region":
        inner = self.contains
        return Region(lambda u1, u2: inner(u1 / T, u2 / T), np.asarray(self.vertices) * T,
                      self.area * T * T)


def unit_disk() -> Region:
    return Region(lambda u1, u2: u1 * u1 + u2 * u2 <= 1.0,
                  np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]), math.pi)


def box(x0: float, x1: float, y0: float, y1: float) -> Region:
    return Region(lambda u1, u2: (u1 >= x0) & (u1 <= x1) & (u2 >= y0) & (u2 <= y1),
                  np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]), (x1 - x0) * (y1 - y0))


def triangle_region(X: float) -> Region:
    tri = TriangleRegion(X)
    return Region(tri.contains, tri.vertices, tri.area)


@dataclass(frozen=True)
class LatticeBasis:
    """Rows of ``M``; the deformed lattice is ``{v M : v in Z^2}``."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (2, 2):
            raise DomainError("lattice basis must be 2x2")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det - 1.0) > 1e-10 * max(1.0, float(np.abs(m).max()) ** 2):
            raise DomainError(f"lattice basis must have determinant 1 (got {det!r})")
        object.__setattr__(self, "m", m)

    @classmethod
    def deformed(cls, g0: GroupElement, R: float) -> "LatticeBasis":
        """``M = g0 diag(e^{-R/2}, e^{R/2})``."""
        e, f = math.exp(-R / 2), math.exp(R / 2)
        return cls(np.array([[g0.a * e, g0.b * f], [g0.c * e, g0.d * f]]))


def _as_matrix(M) -> np.ndarray:
    if isinstance(M, LatticeBasis):
        return M.m
    if isinstance(M, GroupElement):
        return M.to_array()
    return np.asarray(M, dtype=float)


# -- integers ---------------------------------------------------------------

def is_primitive(c: int, d: int) -> bool:
    if c == 0 and d == 0:
        raise DomainError("the zero vector has no primitivity")
    return math.gcd(int(c), int(d)) == 1


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a x + b y = g = gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def complete_coset(v: PrimitiveVector) -> GroupElement:
    """An element of SL(2,Z) with bottom row ``(c, d)``.

    The top row is normalised to ``0 <= a < |c|`` (``b = 0`` when ``c = 0``),
    which picks one representative of the coset ``Gamma_inf gamma``.
    """
    c, d = int(v.c), int(v.d)
    if c == 0:
        return GroupElement(float(d), 0.0, 0.0, float(d))
    g, x, y = egcd(d, -c)  # d x - c y = 1
    if g != 1:
        raise DomainError(f"({c}, {d}) is not primitive")
    sgn = 1 if c > 0 else -1
    k = x // abs(c)
    a, b = x - k * abs(c), y - k * sgn * d
    return GroupElement(float(a), float(b), float(c), float(d))


def complete_coset_arrays(c: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`complete_coset`; returns top rows ``(a, b)``."""
    c = np.asarray(c, dtype=np.int64)
    d = np.asarray(d, dtype=np.int64)
    # extended Euclid on (d, -c) run in lockstep
    r0, r1 = d.copy(), -c
    x0, x1 = np.ones_like(d), np.zeros_like(d)
    y0, y1 = np.zeros_like(d), np.ones_like(d)
    while np.any(r1 != 0):
        nz = r1 != 0
        q = np.zeros_like(r0)
        q[nz] = np.floor_divide(r0[nz], r1[nz])
        r0, r1 = np.where(nz, r1, r0), np.where(nz, r0 - q * r1, r1)
        x0, x1 = np.where(nz, x1, x0), np.where(nz, x0 - q * x1, x1)
        y0, y1 = np.where(nz, y1, y0), np.where(nz, y0 - q * y1, y1)
    sign = np.where(r0 < 0, -1, 1)
    if np.any(r0 * sign != 1):
        raise DomainError("non-primitive vector in coset completion")
    a, b = x0 * sign, y0 * sign
    cz = c == 0
    ac = np.where(cz, 1, np.abs(c))
    k = np.floor_divide(a, ac)
    a = a - k * ac
    b = b - k * np.sign(c) * d
    a = np.where(cz, d, a)
    b = np.where(cz, 0, b)
    return a, b


# -- reduction --------------------------------------------------------------

def gauss_reduce(b1, b2) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lagrange-Gauss reduction of a planar lattice basis.

    Returns ``(e1, e2, U)`` with ``[e1; e2] = U [b1; b2]``, ``U`` integer with
    ``det U = +-1`` and ``|e1| <= |e2|``, ``|<e1, e2>| <= |e1|^2 / 2``.
    """
    B = np.array([b1, b2], dtype=float)
    U = [[1, 0], [0, 1]]

    def vec(row):
        return row[0] * B[0] + row[1] * B[1]

    v1, v2 = vec(U[0]), vec(U[1])
    if v1 @ v1 > v2 @ v2:
        U = [U[1], U[0]]
        v1, v2 = v2, v1
    for _ in range(_MAX_REDUCE_ITER):
        mu = round(float(v1 @ v2) / float(v1 @ v1))
        if mu:
            U[1] = [U[1][0] - mu * U[0][0], U[1][1] - mu * U[0][1]]
            v2 = vec(U[1])
        if v2 @ v2 >= v1 @ v1:
            return v1, v2, np.array(U, dtype=np.int64)
        U = [U[1], U[0]]
        v1, v2 = v2, v1
    raise ConvergenceError("Gauss reduction did not terminate")


def shortest_norm_sq(rows: np.ndarray) -> np.ndarray:
    """Squared length of the shortest non-zero vector, for a stack of bases.

    ``rows`` has shape ``(..., 2, 2)``; each ``rows[k]`` holds two basis rows.
    """
    rows = np.asarray(rows, dtype=float)
    shape = rows.shape[:-2]
    b1 = rows[..., 0, :].reshape(-1, 2).copy()
    b2 = rows[..., 1, :].reshape(-1, 2).copy()
    n1 = np.einsum("ij,ij->i", b1, b1)
    n2 = np.einsum("ij,ij->i", b2, b2)
    swap = n1 > n2
    b1[swap], b2[swap] = b2[swap], b1[swap].copy()
    n1, n2 = np.minimum(n1, n2), np.maximum(n1, n2)
    active = np.ones(len(n1), dtype=bool)
    for _ in range(_MAX_REDUCE_ITER):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        mu = np.rint(np.einsum("ij,ij->i", b1[idx], b2[idx]) / n1[idx])
        nb2 = b2[idx] - mu[:, None] * b1[idx]
        nn2 = np.einsum("ij,ij->i", nb2, nb2)
        done = nn2 >= n1[idx]
        b2[idx] = nb2
        n2[idx] = nn2
        go = idx[~done]
        b1[go], b2[go] = b2[go], b1[go].copy()
        n1[go], n2[go] = n2[go], n1[go].copy()
        active[idx[done]] = False
    else:
        raise ConvergenceError("vectorised Gauss reduction did not terminate")
    return n1.reshape(shape)


_S = ((0, -1), (1, 0))


def reduce_fundamental(g: GroupElement) -> tuple[GroupElement, GroupElement]:
    """Find ``gamma`` in SL(2,Z) moving ``g i`` into the standard fundamental domain.

    Returns ``(gamma, gamma g)``.
    """
    z = base_point(g).z
    ga, gb, gc, gd = 1, 0, 0, 1
    for _ in range(_MAX_REDUCE_ITER):
        n = math.floor(z.real + 0.5)
        if n:
            z -= n
            ga, gb = ga - n * gc, gb - n * gd
        if abs(z) < 1.0:
            z = -1.0 / z
            ga, gb, gc, gd = -gc, -gd, ga, gb
            continue
        break
    else:
        raise ConvergenceError("fundamental domain reduction did not converge")
    gamma = GroupElement(float(ga), float(gb), float(gc), float(gd))
    m = np.array([[ga, gb], [gc, gd]], dtype=float) @ g.to_array()
    # large integer entries leave rounding in the determinant; divide it out
    m /= math.sqrt(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    return gamma, GroupElement.from_array(m)


def in_fundamental_domain(z: UpperHalfPoint, tol: float = 1e-9) -> bool:
    return abs(z.x) <= 0.5 + tol and z.x * z.x + z.y * z.y >= 1.0 - tol


# -- enumeration ------------------------------------------------------------

def _line_intervals(K: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """x-extent of the convex polygon ``K`` along each horizontal line ``y``."""
    ymin, ymax = K[:, 1].min(), K[:, 1].max()
    y = np.clip(ys, ymin, ymax)
    lo = np.full(len(y), np.inf)
    hi = np.full(len(y), -np.inf)
    n = len(K)
    for i in range(n):
        (x0, y0), (x1, y1) = K[i], K[(i + 1) % n]
        for xv, yv in ((x0, y0), (x1, y1)):
            hit = y == yv
            lo = np.where(hit, np.minimum(lo, xv), lo)
            hi = np.where(hit, np.maximum(hi, xv), hi)
        if y1 == y0:
            continue
        lam = (y - y0) / (y1 - y0)
        ok = (lam >= 0) & (lam <= 1)
        x = x0 + lam * (x1 - x0)
        lo = np.where(ok, np.minimum(lo, x), lo)
        hi = np.where(ok, np.maximum(hi, x), hi)
    return lo, hi


def _candidates(M: np.ndarray, vertices: np.ndarray, cap: int,
                chunk: int = _CHUNK) -> Iterator[np.ndarray]:
    """Yield batches of integer vectors ``v`` covering every ``v M`` in the polygon.

    The scan works in a Gauss-reduced frame of the lattice rescaled so the
    polygon's bounding box becomes a unit square; lines parallel to the short
    basis vector are walked one at a time, with a one-step margin on every
    interval so rounding can only add candidates, never drop them.
    """
    vertices = np.asarray(vertices, dtype=float)
    width = vertices.max(axis=0) - vertices.min(axis=0)
    width = np.where(width > 0, width, 1.0)
    _, _, U = gauss_reduce(M[0] / width, M[1] / width)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    Minv = np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]]) / det
    Uinv = np.array([[U[1, 1], -U[0, 1]], [-U[1, 0], U[0, 0]]]) * int(
        U[0, 0] * U[1, 1] - U[0, 1] * U[1, 0])
    K = (vertices @ Minv) @ Uinv  # polygon in reduced coordinates
    k2 = np.arange(math.floor(K[:, 1].min()) - 1, math.ceil(K[:, 1].max()) + 2, dtype=np.int64)
    lo, hi = _line_intervals(K, k2.astype(float))
    lo = np.floor(lo).astype(np.int64) - 1
    hi = np.ceil(hi).astype(np.int64) + 1
    counts = hi - lo + 1
    total = int(counts.sum())
    if total > cap:
        raise CapacityError(f"enumeration needs {total} candidates, cap is {cap}")
    ends = np.cumsum(counts)
    start = 0
    while start < len(k2):
        base = ends[start - 1] if start else 0
        stop = int(np.searchsorted(ends, base + chunk, side="right"))
        stop = max(stop, start + 1)
        c = counts[start:stop]
        n = int(c.sum())
        offsets = np.arange(n, dtype=np.int64) - np.repeat(np.cumsum(c) - c, c)
        kk1 = np.repeat(lo[start:stop], c) + offsets
        kk2 = np.repeat(k2[start:stop], c)
        yield np.stack([kk1 * U[0, 0] + kk2 * U[1, 0], kk1 * U[0, 1] + kk2 * U[1, 1]], axis=1)
        start = stop


def polygon_points(M, region, cap: int = DEFAULT_CAP,
                   primitive: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """All integer (by default primitive) ``v`` with ``v M`` in ``region``.

    Returns ``(V, Uv)``: integer vectors of shape ``(n, 2)`` and their images.
    Order is unspecified.
    """
    M = _as_matrix(M)
    vs, us = [], []
    for V in _candidates(M, region.vertices, cap):
        u = V @ M
        keep = region.contains(u[:, 0], u[:, 1])
        if primitive:
            keep &= np.gcd(V[:, 0], V[:, 1]) == 1
        vs.append(V[keep])
        us.append(u[keep])
    if not vs:
        return np.zeros((0, 2), dtype=np.int64), np.zeros((0, 2))
    return np.concatenate(vs), np.concatenate(us)


def triangle_points(M, X: float, cap: int = DEFAULT_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Primitive points of the deformed lattice in ``Delta_X``, sorted by ``u1/u2``.

    Ties (which only occur on measure-zero inputs) are broken by ``(c, d)``.
    """
    region = TriangleRegion(X)
    V, Uv = polygon_points(M, region, cap)
    order = np.lexsort((V[:, 1], V[:, 0], Uv[:, 0] / Uv[:, 1]))
    return V[order], Uv[order]


def enumerate_in_triangle(M, region: TriangleRegion,
                          cap: int = DEFAULT_CAP) -> list[tuple[PrimitiveVector, np.ndarray]]:
    if not abs(region.X) <= 1e9:
        raise DomainError("triangle aperture must satisfy |X| <= 1e9")
    V, Uv = triangle_points(M, region.X, cap)
    return [(PrimitiveVector(int(c), int(d)), u) for (c, d), u in zip(V, Uv)]


def count_in_dilate(M, region: Region, T: float, cap: int = DEFAULT_CAP) -> int:
    """Number of primitive ``v`` with ``v M`` in ``T * region``."""
    if not T > 0:
        raise DomainError("dilation factor must be positive")
    M = _as_matrix(M)
    big = region.dilate(T)
    total = 0
    for V in _candidates(M, big.vertices, cap):
        u = V @ M
        keep = big.contains(u[:, 0], u[:, 1]) & (np.gcd(V[:, 0], V[:, 1]) == 1)
        total += int(np.count_nonzero(keep))
    return total
