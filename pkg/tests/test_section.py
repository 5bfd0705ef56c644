import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from horoxt import mc
from horoxt.errors import CapacityError, DomainError
from horoxt.section import (OrbitSpec, direct_crossing_oracle, first_entry_time, first_hit_time,
                            height_at_time, heights_along, hit_arrays, hit_process,
                            return_time_backward, return_time_forward, section_return_times,
                            sejour, sup_excursion, sup_excursion_height, sup_peak_height)
from horoxt.section import _golden_max
from horoxt.sl2core import ASZCoords, GroupElement, asz_encode, geodesic_flow

I = GroupElement.identity()
HAAR = mc.SamplerSpec(seed=21)


def haar(i):
    return mc.sample_initial(HAAR, i)


def test_identity_orbit_single_hit():
    hits = hit_process(OrbitSpec(I, 0.0, 1.0))
    assert len(hits) == 1
    h = hits[0]
    assert (h.xi, h.s, h.t, h.delta, h.xi_entry) == (1.0, 0.0, 0.0, 0.0, 1.0)
    assert (h.vector.c, h.vector.d) == (1, 1)


def test_identity_orbit_peak_by_hand():
    # the orbit point at time 1 is (-1 + i)/2; gamma = [[1, 0], [1, 1]] lifts it to height 1
    z = complex(-1, 1) / 2
    assert (z / (z + 1)).imag == pytest.approx(1.0)


def test_no_hits_cases():
    assert hit_process(OrbitSpec(I, 0.5, 1.0)) == []
    assert direct_crossing_oracle(OrbitSpec(I, 10.0, 1.0)) == []


def test_orbit_spec_validation():
    with pytest.raises(DomainError):
        OrbitSpec(I, 0.0, 0.0)
    with pytest.raises(CapacityError):
        OrbitSpec(I, 0.0, 2e9)


def test_sejour():
    assert sejour(0.0) == 0.0
    assert sejour(math.log(2)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        sejour(-0.1)


def test_sejour_arc_length():
    # the horocycle through the peak ib is the circle |z - ib/2| = b/2; its hyperbolic
    # arc length from the top down to the line Im z = a should be sqrt(b/a - 1)
    a, b = 1.0, 4.0
    ell = math.sqrt(a * b - a * a)
    phi1 = math.atan2(a - b / 2, ell)
    length, _ = integrate.quad(lambda p: (b / 2) / (b / 2 + (b / 2) * math.sin(p)), phi1, math.pi / 2)
    assert ell / a == pytest.approx(math.sqrt(3))
    assert length == pytest.approx(math.sqrt(3), abs=1e-10)
    assert sejour(math.log(b / a)) == pytest.approx(length, abs=1e-10)


def test_sejour_matches_entry_geometry():
    # entering and leaving the height-R neighbourhood happens at xi -+ delta
    g = haar(3)
    h = hit_arrays(g, 0.5, 40.0)
    for xi, d in zip(h["xi"], h["delta"]):
        if d > 0.01:
            assert height_at_time(g, xi - d) == pytest.approx(0.5, abs=1e-9)
            assert height_at_time(g, xi + d) == pytest.approx(0.5, abs=1e-9)


def test_hit_invariants():
    for i in range(20):
        h = hit_process(OrbitSpec(haar(i), 0.3, 30.0))
        xs = [e.xi for e in h]
        assert all(b > a for a, b in zip(xs, xs[1:]))
        for e in h:
            assert e.delta == pytest.approx(math.sqrt(math.expm1(e.t)), abs=1e-9)
            assert e.xi_entry == e.xi - e.delta
            assert 0 <= e.s < 1 and e.t >= 0 and 0 < e.xi <= 30.0


def test_hit_heights_are_peaks():
    g = haar(5)
    h = hit_arrays(g, 0.0, 30.0)
    assert np.allclose(heights_along(g, h["xi"]), h["t"], atol=1e-9)


def test_oracle_agreement():
    for i in range(50):
        spec = OrbitSpec(haar(i), 0.0, 20.0)
        a, b = hit_process(spec), direct_crossing_oracle(spec)
        assert len(a) == len(b)
        for x, y in zip(a, b):
            assert abs(x.xi - y.xi) <= 1e-7 and abs(x.t - y.t) <= 1e-7
            assert (x.vector.c, x.vector.d) == (y.vector.c, y.vector.d)


def test_oracle_positive_R():
    for i in range(10):
        spec = OrbitSpec(haar(100 + i), 1.5, 60.0)
        a, b = hit_process(spec), direct_crossing_oracle(spec)
        assert [(e.vector.c, e.vector.d) for e in a] == [(e.vector.c, e.vector.d) for e in b]


def test_oracle_identity_orbit():
    out = direct_crossing_oracle(OrbitSpec(I, 0.0, 1.0))
    assert len(out) == 1 and out[0].xi == pytest.approx(1.0, abs=1e-7)


def test_scaling_law():
    for i in range(20):
        g = haar(i)
        for R in (1.0, 2.0):
            a = hit_arrays(g, R, 20.0)
            b = hit_arrays(geodesic_flow(g, -R), 0.0, 20.0 * math.exp(-R))
            assert np.array_equal(a["c"], b["c"]) and np.array_equal(a["d"], b["d"])
            assert np.allclose(a["xi"], math.exp(R) * b["xi"], rtol=0, atol=1e-9)
            assert np.allclose(a["t"], b["t"], rtol=0, atol=1e-12)


def test_height_examples():
    assert height_at_time(I, 0.0) == pytest.approx(0.0)
    assert height_at_time(asz_encode(ASZCoords(0, 0, 3.0)), 0.0) == pytest.approx(3.0)


def test_height_exhaustive():
    for i in range(30):
        g = haar(i)
        s = 7.3
        gs = g.to_array() @ np.array([[1, 0], [-s, 1]])
        c, d = np.meshgrid(np.arange(-50, 51), np.arange(-50, 51))
        c, d = c.ravel(), d.ravel()
        keep = (np.gcd(c, d) == 1)
        v = np.stack([c[keep], d[keep]], 1) @ gs
        best = -np.log(np.min(np.sum(v * v, 1)))
        assert height_at_time(g, s) == pytest.approx(best, abs=1e-10)


def test_sup_examples():
    assert sup_excursion_height(OrbitSpec(I, 0.0, 1.0)) == 0.0


def test_sup_against_dense_grid():
    for i in range(100):
        g = haar(i)
        T = 10.0
        grid = np.linspace(0, T, 10_001)
        H = heights_along(g, grid)
        best = max(H[0], H[-1])
        inner = np.nonzero((H[1:-1] >= H[:-2]) & (H[1:-1] >= H[2:]))[0] + 1
        if len(inner):
            s = _golden_max(lambda x: heights_along(g, x), grid[inner - 1], grid[inner + 1])
            best = max(best, heights_along(g, s).max())
        assert sup_excursion_height(OrbitSpec(g, 0.0, T)) == pytest.approx(best, abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(1, 50), st.floats(1, 50))
def test_sup_monotone(i, t1, t2):
    g = haar(i)
    lo, hi = sorted((t1, t2))
    assert sup_excursion_height(OrbitSpec(g, 0.0, lo)) <= sup_excursion_height(OrbitSpec(g, 0.0, hi))


def test_sup_attained_by_endpoint_or_peak():
    for i in range(30):
        g = haar(i)
        T = 25.0
        best, when = sup_excursion(OrbitSpec(g, 0.0, T))
        ends = heights_along(g, np.array([0.0, T]))
        peak = sup_peak_height(g, T)
        assert best >= max(ends.max(), peak) - 1e-12
        assert min(abs(best - ends[0]), abs(best - ends[1]), abs(best - peak)) <= 1e-12
        assert height_at_time(g, when) == pytest.approx(best, abs=1e-9)


def test_first_entry_time_against_grid():
    for i in range(40):
        g = haar(i)
        R = 1.0
        fe = first_entry_time(g, R)
        if fe == 0.0:
            assert height_at_time(g, 0.0) >= R
            continue
        assert height_at_time(g, fe) == pytest.approx(R, abs=1e-8)
        grid = np.linspace(0, fe, 20_001)[:-1]
        assert heights_along(g, grid).max() < R
        # entry precedes the first peak and shares its excursion in most cases
        assert fe <= first_hit_time(g, R) + 1e-9


def test_first_hit_is_first_process_hit():
    for i in range(20):
        g = haar(i)
        x = first_hit_time(g, 0.0)
        hits = hit_process(OrbitSpec(g, 0.0, x + 1.0))
        assert hits[0].xi == pytest.approx(x)


def test_return_times_minimal_and_vectorised():
    s, t = mc.sample_nu(10_000, seed=3)
    fwd = section_return_times(s, t)
    back = section_return_times(s, t, backward=True)
    assert fwd.min() >= 1 - 1e-9 and back.min() >= 1 - 1e-9
    for k in range(0, 10_000, 500):
        assert fwd[k] == pytest.approx(return_time_forward((s[k], t[k])), rel=1e-12)
        assert back[k] == pytest.approx(return_time_backward((s[k], t[k])), rel=1e-12)
    assert section_return_times(s[:50], t[:50], R=1.5) == pytest.approx(math.exp(1.5) * fwd[:50])
    with pytest.raises(DomainError):
        return_time_forward((0.1, -1.0))


def test_return_from_section_point_excludes_start():
    # identity sits on the section; the next peak is at time 1
    assert return_time_forward((0.0, 0.0)) == pytest.approx(1.0)
    assert return_time_backward((0.0, 0.0)) == pytest.approx(1.0)
