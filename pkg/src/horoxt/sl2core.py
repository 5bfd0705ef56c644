"""Exact algebra of SL(2,R): flows, Moebius action and two coordinate charts.

Points of the unit tangent bundle of the modular surface are cosets
``Gamma g``; everything here works on the lift ``g`` as a real 2x2 matrix
of determinant one.  Flows act by right multiplication::

    geodesic   phi_t(g)  = g diag(e^{t/2}, e^{-t/2})
    unstable   h+_s(g)   = g [[1, 0], [-s, 1]]
    stable     h-_s(g)   = g [[1, s], [0, 1]]

The section chart is ``A(r, s, t) = n(s) a(t) nbar(r)`` with ``n`` upper and
``nbar`` lower unipotent; the Iwasawa chart is ``n(u) a(v) k(theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartError, DomainError, FlowRangeError

UNIMODULAR_TOL = 1e-12
MAX_FLOW_TIME = 1400.0
CHART_EPS = 1e-14


@dataclass(frozen=True)
class GroupElement:
    """Row-major entries of a unimodular 2x2 real matrix."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        # rounding in a*d - b*c scales with the size of the products
        scale = max(1.0, abs(self.a * self.d) + abs(self.b * self.c))
        if not abs(det - 1.0) <= UNIMODULAR_TOL * scale:
            raise DomainError(f"matrix is not unimodular (det={det!r})")

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, m) -> "GroupElement":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def __neg__(self) -> "GroupElement":
        return GroupElement(-self.a, -self.b, -self.c, -self.d)

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def allclose(self, other: "GroupElement", atol: float = 1e-10) -> bool:
        return bool(np.allclose(self.to_array(), other.to_array(), rtol=0.0, atol=atol))


@dataclass(frozen=True)
class UpperHalfPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError(f"point is not in the upper half plane (y={self.y!r})")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class IwasawaCoords:
    u: float
    v: float
    theta: float

    def __post_init__(self):
        if not self.v > 0:
            raise DomainError("Iwasawa coordinate v must be positive")


@dataclass(frozen=True)
class ASZCoords:
    r: float
    s: float
    t: float


def _check_flow_time(t: float) -> None:
    if abs(t) > MAX_FLOW_TIME:
        raise FlowRangeError(f"|t|={abs(t):g} exceeds {MAX_FLOW_TIME:g}")


def diag_flow(t: float) -> GroupElement:
    """The matrix diag(e^{t/2}, e^{-t/2})."""
    _check_flow_time(t)
    return GroupElement(math.exp(t / 2), 0.0, 0.0, math.exp(-t / 2))


def geodesic_flow(g: GroupElement, t: float) -> GroupElement:
    _check_flow_time(t)
    e, f = math.exp(t / 2), math.exp(-t / 2)
    return GroupElement(g.a * e, g.b * f, g.c * e, g.d * f)


def horocycle_plus(g: GroupElement, s: float) -> GroupElement:
    """Unstable horocycle flow: right multiplication by [[1, 0], [-s, 1]]."""
    return GroupElement(g.a - s * g.b, g.b, g.c - s * g.d, g.d)


def horocycle_minus(g: GroupElement, s: float) -> GroupElement:
    """Stable horocycle flow: right multiplication by [[1, s], [0, 1]]."""
    return GroupElement(g.a, g.b + s * g.a, g.c, g.d + s * g.c)


def rotation(theta: float) -> GroupElement:
    c, s = math.cos(theta), math.sin(theta)
    return GroupElement(c, -s, s, c)


def mobius_apply(g: GroupElement, z: UpperHalfPoint) -> UpperHalfPoint:
    w = (g.a * z.z + g.b) / (g.c * z.z + g.d)
    # Im part computed from the exact formula keeps y > 0 when w.imag underflows
    denom = (g.c * z.x + g.d) ** 2 + (g.c * z.y) ** 2
    return UpperHalfPoint(w.real, z.y / denom)


def base_point(g: GroupElement) -> UpperHalfPoint:
    """Image of i under g, i.e. the footpoint of the coset on the surface."""
    return mobius_apply(g, UpperHalfPoint(0.0, 1.0))


def asz_encode(coords: ASZCoords) -> GroupElement:
    r, s, t = coords.r, coords.s, coords.t
    _check_flow_time(t)
    e, f = math.exp(t / 2), math.exp(-t / 2)
    return GroupElement(e + s * r * f, s * f, r * f, f)


def asz_decode(g: GroupElement) -> ASZCoords:
    """Inverse of :func:`asz_encode`, identifying g with -g."""
    if abs(g.d) < CHART_EPS:
        raise ChartError("lower-right entry vanishes; matrix is off the section chart")
    if g.d < 0:
        g = -g
    return ASZCoords(r=g.c / g.d, s=g.b / g.d, t=-2.0 * math.log(g.d))


def iwasawa_encode(coords: IwasawaCoords) -> GroupElement:
    u, v, theta = coords.u, coords.v, coords.theta
    sv = math.sqrt(v)
    c, s = math.cos(theta), math.sin(theta)
    # n(u) diag(sqrt v, 1/sqrt v) k(theta)
    return GroupElement(sv * c + u * s / sv, -sv * s + u * c / sv, s / sv, c / sv)


def iwasawa_decompose(g: GroupElement) -> IwasawaCoords:
    denom = g.c * g.c + g.d * g.d
    v = 1.0 / denom
    u = (g.a * g.c + g.b * g.d) / denom
    sv = math.sqrt(v)
    theta = math.atan2(g.c * sv, g.d * sv) % (2 * math.pi)
    # atan2 can return exactly 2*pi after the modulo for tiny negative angles
    if theta >= 2 * math.pi:
        theta = 0.0
    return IwasawaCoords(u, v, theta)
