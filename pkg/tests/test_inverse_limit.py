from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewlab.circle_maps import Itinerary, backward_orbit, itinerary_distance, random_itinerary
from skewlab.errors import ValidationError
from skewlab.fourier import CircleFunction
from skewlab.inverse_limit import (LinearModel, branch_inverse, cylinder_measure_estimate, itinerary_orbit,
                                   lift_forward, reindex_itinerary)
from skewlab.system import build_system

F = Fraction
M2 = LinearModel(2)


@pytest.mark.parametrize("l", [2, 3, 7])
def test_linear_model_lattice(l):
    m = LinearModel(l)
    assert round(abs(np.linalg.det(m.A))) == l
    assert m.image_lattice_points() == m.translations()


def test_branch_inverse_examples():
    assert branch_inverse(M2, 0, (F(0), F(0))) == (0, 0)
    assert branch_inverse(M2, 1, (F(0), F(0))) == (F(1, 2), 0)
    x, y = branch_inverse(LinearModel(2, CircleFunction.sin(1)), 1, (F(0), F(0)))
    assert x == F(1, 2) and y == pytest.approx(0, abs=1e-15)
    with pytest.raises(ValidationError):
        branch_inverse(M2, 2, (0.0, 0.0))


def test_branch_inverse_undoes_lift():
    m = LinearModel(3, CircleFunction.sin(1, 0.3))
    p = (0.4, 0.1)
    for i in range(3):
        q = branch_inverse(m, i, p)
        fx, fy = lift_forward(m, q)
        assert fx == pytest.approx(p[0] + i) and fy == pytest.approx(p[1])


def test_itinerary_orbit_examples():
    o = itinerary_orbit(M2, (0, 0), Itinerary.zeros(2), 3)
    assert o.torus == [(0, 0)] * 3
    o = itinerary_orbit(M2, (0, 0), Itinerary.constant(2, 1), 2)
    assert [p[0] for p in o.torus] == [F(1, 2), F(3, 4)]


@settings(max_examples=40)
@given(st.integers(2, 5), st.fractions(0, F(99, 100)), st.fractions(0, F(99, 100)), st.integers(0, 2**32 - 1))
def test_orbit_matches_backward_orbit(l, x, y, seed):
    it = random_itinerary(l, np.random.default_rng(seed), 6)
    o = itinerary_orbit(LinearModel(l), (x, y), it, 6)
    assert [p[0] for p in o.torus] == backward_orbit(l, x, it, 6)


@settings(max_examples=40)
@given(st.integers(2, 6), st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_branch_partition(l, x, y):
    m = LinearModel(l, CircleFunction.sin(1, 0.5))
    images = [branch_inverse(m, i, (x, y)) for i in range(l)]
    xs = sorted(p[0] % 1 for p in images)
    assert all(b - a > 0.5 / l for a, b in zip(xs, xs[1:]))
    system = build_system(l, CircleFunction.sin(1, 0.5))
    for px, py in images:
        fx, fy = system.apply(px % 1, py % 1)
        assert abs((fx - x + 0.5) % 1 - 0.5) < 1e-12 and abs((fy - y + 0.5) % 1 - 0.5) < 1e-12


def test_reindex_examples():
    z = Itinerary.zeros(2)
    assert reindex_itinerary(M2, z, (1, 0), 4).digits == (1, 0, 0, 0)
    assert reindex_itinerary(M2, z, (2, 0), 4).digits == (0, 1, 0, 0)
    a = Itinerary(3, (2, 0, 1), (1, 2))
    r = reindex_itinerary(LinearModel(3), a, (0, 0), 9)
    assert r.digits == tuple(a.digits(9)) and all(e == (0, 0) for e in r.offsets)
    assert r.itinerary == a


def test_reindex_conventions():
    r = reindex_itinerary(M2, Itinerary.zeros(2), (6, 0), 5)
    assert r.recursion_holds
    # the printed orientation holds at step 1 and wherever the previous offset vanishes
    assert 1 in r.printed_form_steps
    assert 2 not in r.printed_form_steps and r.offsets[1] != (0, 0)


@pytest.mark.parametrize("l", [2, 3])
def test_reindex_base_digits(l):
    for m in range(1, l**6):
        r = reindex_itinerary(LinearModel(l), Itinerary.zeros(l), (m, 0), 6)
        expected = tuple((m // l**i) % l for i in range(6))
        assert r.digits == expected


def test_reindex_independent_of_base_point():
    rng = np.random.default_rng(5)
    a = random_itinerary(3, rng, 12)
    ref = reindex_itinerary(LinearModel(3), a, (17, -2), 12)
    for _ in range(16):
        x0 = (F(int(rng.integers(0, 1000)), 1000), F(int(rng.integers(0, 1000)), 1000))
        r = reindex_itinerary(LinearModel(3), a, (17, -2), 12, x0=x0)
        assert r.digits == ref.digits and r.offsets == ref.offsets


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
def test_reindex_lipschitz(seed, l):
    rng = np.random.default_rng(seed)
    a = random_itinerary(l, rng, 16)
    k = int(rng.integers(0, 16))
    b = Itinerary(l, a.prefix[:k] + tuple(rng.integers(0, l, 16 - k)), (0,))
    m0 = (int(rng.integers(-100, 100)), 0)
    ha = reindex_itinerary(LinearModel(l), a, m0, 16, verify=False).itinerary
    hb = reindex_itinerary(LinearModel(l), b, m0, 16, verify=False).itinerary
    assert itinerary_distance(ha, hb) <= l * itinerary_distance(a, b)


def test_reindex_full_itinerary_consistent():
    a = Itinerary(2, (1, 1, 0), (1,))
    r = reindex_itinerary(M2, a, (5, 0), 20)
    assert r.itinerary.digits(20).tolist() == list(r.digits)


def test_cylinder_examples():
    s = build_system(2, CircleFunction.constant(0))
    full = cylinder_measure_estimate(s, [(0, 1, 0, 1)] * 4, samples=20_000)
    assert full.estimate == 1 and full.stderr == 0
    half = [(0, 0.5, 0, 1), (0, 0.5, 0, 1)]
    est = cylinder_measure_estimate(s, half, samples=200_000, seed=1)
    assert abs(est.estimate - 0.25) < 3 * est.stderr + 1e-12
    box = cylinder_measure_estimate(s, [(0.1, 0.4, 0.2, 0.7)], samples=200_000, seed=2)
    assert abs(box.estimate - 0.15) < 4 * box.stderr


def test_cylinder_monotone_in_depth():
    s = build_system(2, CircleFunction.sin(1, 0.5))
    box = (0.0, 0.6, 0.1, 0.9)
    vals = [cylinder_measure_estimate(s, [box] * (n + 1), samples=50_000, seed=3).estimate for n in range(6)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_cylinder_deterministic_across_threads():
    s = build_system(2, CircleFunction.sin(1, 0.5))
    boxes = [(0, 0.5, 0, 0.5), (0.25, 1, 0, 1)]
    a = cylinder_measure_estimate(s, boxes, samples=200_000, seed=9, threads=1)
    b = cylinder_measure_estimate(s, boxes, samples=200_000, seed=9, threads=3)
    assert a == b


def test_cylinder_rejects_bad_boxes():
    s = build_system(2, CircleFunction.constant(0))
    with pytest.raises(ValidationError):
        cylinder_measure_estimate(s, [(0.5, 0.2, 0, 1)])
    with pytest.raises(ValidationError):
        cylinder_measure_estimate(s, [(0, 1.5, 0, 1)])
