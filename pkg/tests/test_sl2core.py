import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from horoxt.errors import ChartError, DomainError, FlowRangeError
from horoxt.sl2core import (ASZCoords, GroupElement, IwasawaCoords, UpperHalfPoint, asz_decode,
                            asz_encode, base_point, diag_flow, geodesic_flow, horocycle_minus,
                            horocycle_plus, iwasawa_decompose, iwasawa_encode, mobius_apply,
                            rotation)

I = GroupElement.identity()
S = GroupElement(0.0, -1.0, 1.0, 0.0)

small = st.floats(-3, 3, allow_nan=False)
angle = st.floats(0, 2 * math.pi, allow_nan=False, exclude_max=True)


@st.composite
def group_elements(draw):
    # Iwasawa coordinates give every element of SL(2,R) up to sign
    u = draw(st.floats(-3, 3))
    v = draw(st.floats(0.2, 5))
    th = draw(angle)
    return iwasawa_encode(IwasawaCoords(u, v, th))


def mat(g):
    return g.to_array()


def close(g, h, tol=1e-10):
    return np.allclose(mat(g), mat(h), rtol=0, atol=tol)


def test_unimodularity_enforced():
    with pytest.raises(DomainError):
        GroupElement(1.0, 0.0, 0.0, 2.0)
    GroupElement(1.0, 0.0, 0.0, 1.0 + 5e-13)


def test_upper_half_point_positive():
    with pytest.raises(DomainError):
        UpperHalfPoint(0.0, 0.0)


def test_geodesic_examples():
    assert close(geodesic_flow(I, 0.0), I)
    assert close(geodesic_flow(I, 2 * math.log(2)), GroupElement(2.0, 0.0, 0.0, 0.5))
    with pytest.raises(FlowRangeError):
        geodesic_flow(I, 1400.5)
    with pytest.raises(FlowRangeError):
        diag_flow(-2000.0)


def test_horocycle_examples():
    assert close(horocycle_plus(I, 0.0), I)
    assert close(horocycle_minus(I, 0.0), I)
    z = base_point(horocycle_plus(I, 1.0))
    assert z.z == pytest.approx((-1 + 1j) / 2)
    z = base_point(horocycle_minus(I, 1.0))
    assert z.z == pytest.approx(1 + 1j)


def test_mobius_examples():
    assert mobius_apply(I, UpperHalfPoint(0, 1)).z == pytest.approx(1j)
    assert mobius_apply(S, UpperHalfPoint(0, 1)).z == pytest.approx(1j)
    assert mobius_apply(S, UpperHalfPoint(0, 2)).z == pytest.approx(0.5j)


def test_mobius_tiny_imaginary_part_stays_positive():
    g = GroupElement(1.0, 0.0, 1e10, 1.0)
    assert mobius_apply(g, UpperHalfPoint(0.0, 1.0)).y > 0


@settings(max_examples=200, deadline=None)
@given(group_elements(), small, small)
def test_flow_laws(g, t1, t2):
    assert close(geodesic_flow(geodesic_flow(g, t1), t2), geodesic_flow(g, t1 + t2))
    assert close(horocycle_plus(horocycle_plus(g, t1), t2), horocycle_plus(g, t1 + t2))
    assert close(horocycle_minus(horocycle_minus(g, t1), t2), horocycle_minus(g, t1 + t2))


@settings(max_examples=200, deadline=None)
@given(group_elements(), small, small)
def test_commutation(g, s, t):
    lhs = geodesic_flow(horocycle_plus(g, s), t)
    rhs = horocycle_plus(geodesic_flow(g, t), s * math.exp(t))
    assert close(lhs, rhs, 1e-9 * max(1.0, np.abs(mat(lhs)).max()))
    lhs = geodesic_flow(horocycle_minus(g, s), t)
    rhs = horocycle_minus(geodesic_flow(g, t), s * math.exp(-t))
    assert close(lhs, rhs, 1e-9 * max(1.0, np.abs(mat(lhs)).max()))


@settings(max_examples=200, deadline=None)
@given(group_elements(), small, small)
def test_unimodularity_preserved(g, s, t):
    for h in (geodesic_flow(g, t), horocycle_plus(g, s), horocycle_minus(g, s), g @ rotation(s)):
        assert abs(h.det() - 1.0) <= 1e-12 * max(1.0, abs(h.a * h.d) + abs(h.b * h.c))


@settings(max_examples=200, deadline=None)
@given(group_elements(), group_elements(), st.floats(-2, 2), st.floats(0.1, 3))
def test_group_action(g1, g2, x, y):
    z = UpperHalfPoint(x, y)
    a = mobius_apply(g1 @ g2, z)
    b = mobius_apply(g1, mobius_apply(g2, z))
    assert abs(a.z - b.z) <= 1e-10 * max(1.0, abs(a.z))


def test_asz_examples():
    assert close(asz_encode(ASZCoords(0, 0, 0)), I)
    s, t = 0.7, 1.3
    expect = GroupElement(math.exp(t / 2), s * math.exp(-t / 2), 0.0, math.exp(-t / 2))
    assert close(asz_encode(ASZCoords(0, s, t)), expect)
    assert asz_decode(I) == ASZCoords(0.0, 0.0, 0.0)
    c = asz_decode(GroupElement(2.0, 0.0, 0.0, 0.5))
    assert (c.r, c.s) == (0.0, 0.0) and c.t == pytest.approx(2 * math.log(2))
    c = asz_decode(-I)
    assert (c.r, c.s, c.t) == (0.0, 0.0, 0.0)
    with pytest.raises(ChartError):
        asz_decode(S)
    with pytest.raises(FlowRangeError):
        asz_encode(ASZCoords(0, 0, 1500))


def test_asz_roundtrip_bulk():
    rng = np.random.default_rng(0)
    for r, s, t in rng.uniform(-5, 5, size=(10_000, 3)):
        c = asz_decode(asz_encode(ASZCoords(r, s, t)))
        assert abs(c.r - r) <= 1e-10 and abs(c.s - s) <= 1e-10 and abs(c.t - t) <= 1e-10


def test_asz_product_form():
    # n(s) a(t) nbar(r)
    r, s, t = 0.3, -1.1, 0.8
    n = np.array([[1, s], [0, 1]])
    a = np.diag([math.exp(t / 2), math.exp(-t / 2)])
    nb = np.array([[1, 0], [r, 1]])
    assert np.allclose(mat(asz_encode(ASZCoords(r, s, t))), n @ a @ nb, atol=1e-14)


def test_iwasawa_examples():
    c = iwasawa_decompose(I)
    assert (c.u, c.v, c.theta) == (0.0, 1.0, 0.0)
    c = iwasawa_decompose(rotation(math.pi))
    assert c.theta == pytest.approx(math.pi) and c.u == pytest.approx(0) and c.v == pytest.approx(1)


@settings(max_examples=300, deadline=None)
@given(st.floats(-4, 4), st.floats(0.05, 20), angle)
def test_iwasawa_roundtrip(u, v, th):
    g = iwasawa_encode(IwasawaCoords(u, v, th))
    c = iwasawa_decompose(g)
    assert 0 <= c.theta < 2 * math.pi
    assert close(iwasawa_encode(c), g, 1e-10 * max(1.0, np.abs(mat(g)).max()))
    z = base_point(g)
    assert abs(z.z - complex(c.u, c.v)) <= 1e-10 * max(1.0, abs(z.z))


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_charts_consistent(r, s, t):
    g = asz_encode(ASZCoords(r, s, t))
    h = iwasawa_encode(iwasawa_decompose(g))
    back = asz_decode(h)
    assert abs(back.r - r) <= 1e-9 and abs(back.s - s) <= 1e-9 and abs(back.t - t) <= 1e-9
