import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from horoxt import mc
from horoxt.errors import CapacityError, DomainError
from horoxt.lattice import (LatticeBasis, PrimitiveVector, TriangleRegion, complete_coset,
                            complete_coset_arrays, count_in_dilate, enumerate_in_triangle,
                            gauss_reduce, in_fundamental_domain, is_primitive,
                            reduce_fundamental, shortest_norm_sq, triangle_points, unit_disk)
from horoxt.sl2core import GroupElement, UpperHalfPoint, base_point, iwasawa_encode, IwasawaCoords

I = GroupElement.identity()


def brute_triangle(M, X, B=None):
    """Primitive v in a box with v M in the (possibly backward) triangle."""
    tri = TriangleRegion(X)
    if B is None:
        pre = tri.vertices @ np.linalg.inv(M)
        B = int(np.ceil(np.abs(pre).max())) + 2
    out = set()
    for c, d in product(range(-B, B + 1), repeat=2):
        if (c, d) == (0, 0) or math.gcd(c, d) != 1:
            continue
        u = np.array([c, d]) @ M
        if tri.contains(u[0], u[1]):
            out.add((c, d))
    return out


def test_is_primitive():
    assert is_primitive(1, 0)
    assert not is_primitive(2, 4)
    assert is_primitive(-3, 7)
    with pytest.raises(DomainError):
        is_primitive(0, 0)
    with pytest.raises(DomainError):
        PrimitiveVector(4, 6)


def test_primitive_density():
    assert abs(mc.primitive_fraction(2000) - 6 / math.pi**2) <= 0.01


@pytest.mark.parametrize("c,d", [(0, 1), (1, 1), (2, 3), (-5, 7), (7, -5), (1, 0), (-1, 0), (0, -1)])
def test_complete_coset(c, d):
    g = complete_coset(PrimitiveVector(c, d))
    assert (g.c, g.d) == (c, d)
    assert g.a * g.d - g.b * g.c == 1
    if c:
        assert 0 <= g.a < abs(c)


def test_complete_coset_identity():
    assert complete_coset(PrimitiveVector(0, 1)) == I


def test_complete_coset_arrays_match():
    rng = np.random.default_rng(4)
    c = rng.integers(-10**6, 10**6, 5000)
    d = rng.integers(-10**6, 10**6, 5000)
    keep = np.gcd(c, d) == 1
    a, b = complete_coset_arrays(c[keep], d[keep])
    assert np.all(a * d[keep] - b * c[keep] == 1)


def test_gauss_reduce_shortest():
    rng = np.random.default_rng(1)
    for _ in range(200):
        B = rng.normal(size=(2, 2)) * rng.uniform(0.1, 10)
        e1, e2, U = gauss_reduce(B[0], B[1])
        assert abs(round(np.linalg.det(U))) == 1
        assert np.allclose(U @ B, [e1, e2])
        brute = min(np.sum((np.array(v) @ B) ** 2) for v in product(range(-30, 31), repeat=2) if v != (0, 0))
        assert e1 @ e1 == pytest.approx(brute, rel=1e-9)
        assert shortest_norm_sq(B[None])[0] == pytest.approx(brute, rel=1e-9)


def test_reduce_fundamental_examples():
    gamma, g = reduce_fundamental(I)
    assert base_point(g).z == pytest.approx(1j)
    h = iwasawa_encode(IwasawaCoords(5.0, 2.0, 0.3))
    _, g = reduce_fundamental(h)
    assert base_point(g).z == pytest.approx(2j)


def test_reduce_fundamental_low_point():
    h = iwasawa_encode(IwasawaCoords(0.1, 0.1, 0.0))
    gamma, g = reduce_fundamental(h)
    z = base_point(g)
    assert in_fundamental_domain(z)
    # exhaustive oracle: the reduced point is the highest image
    best = max(0.1 / ((c * 0.1 + d) ** 2 + (c * 0.1) ** 2)
               for c, d in product(range(-40, 41), repeat=2) if math.gcd(c, d) == 1)
    assert z.y == pytest.approx(best, rel=1e-12)
    assert gamma.a * gamma.d - gamma.b * gamma.c == pytest.approx(1)


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50), st.floats(1e-4, 10))
def test_reduce_fundamental_lands_in_domain(x, y):
    _, g = reduce_fundamental(iwasawa_encode(IwasawaCoords(x, y, 0.0)))
    z = base_point(g)
    assert abs(z.x) <= 0.5 + 1e-9 and abs(z.z) >= 1 - 1e-9


def test_triangle_membership_half_open():
    tri = TriangleRegion(2.0)
    assert tri.contains(2.0, 1.0) and not tri.contains(0.0, 0.5) and not tri.contains(0.5, 0.0)
    back = TriangleRegion(-2.0)
    assert back.contains(-2.0, 1.0) and not back.contains(0.0, 0.5)
    with pytest.raises(DomainError):
        TriangleRegion(0.0)


def test_enumerate_examples():
    out = enumerate_in_triangle(I.to_array(), TriangleRegion(1.0))
    assert [(v.c, v.d) for v, _ in out] == [(1, 1)]
    out = enumerate_in_triangle(I.to_array(), TriangleRegion(2.5))
    assert [(v.c, v.d) for v, _ in out] == [(1, 1), (2, 1)]
    assert np.allclose([u for _, u in out], [[1, 1], [2, 1]])


def test_enumerate_matches_brute_force():
    spec = mc.SamplerSpec(seed=9)
    for i in range(100):
        g = mc.sample_initial(spec, i)
        M = g.to_array()
        for X in (0.5, 3.0, 10.0, -4.0):
            V, U = triangle_points(M, X)
            got = set(map(tuple, V.tolist()))
            assert got == brute_triangle(M, X), (i, X)
            r = U[:, 0] / U[:, 1]
            assert np.all(np.diff(r) > 0)


def test_enumerate_elongated_lattice():
    # strongly sheared basis still enumerated exactly
    M = np.array([[1.0, 0.0], [37.3, 1.0]]) @ np.diag([0.05, 20.0])
    got = set(map(tuple, triangle_points(M, 5.0)[0].tolist()))
    assert got == brute_triangle(M, 5.0)


def test_enumerate_cap():
    with pytest.raises(CapacityError):
        triangle_points(I.to_array(), 1e6, cap=1000)
    with pytest.raises(DomainError):
        enumerate_in_triangle(I.to_array(), TriangleRegion(2e9))


def test_count_in_dilate():
    assert count_in_dilate(I.to_array(), unit_disk(), 10.0) == 192
    assert count_in_dilate(I.to_array(), unit_disk(), 0.5) == 0
    T = 2000.0
    n = count_in_dilate(I.to_array(), unit_disk(), T)
    assert n / T**2 == pytest.approx(2 * math.pi * 3 / math.pi**2, rel=0.02)


def test_lattice_basis_checks():
    with pytest.raises(DomainError):
        LatticeBasis(np.diag([2.0, 2.0]))
    M = LatticeBasis.deformed(I, 2.0).m
    assert np.allclose(M, np.diag([math.exp(-1), math.e]))
