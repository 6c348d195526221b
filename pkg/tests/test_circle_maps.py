from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewlab.circle_maps import (ExpandingBase, Itinerary, backward_orbit, branch, forward, is_periodic,
                                 itinerary_distance, periodic_points, preimage_digit, random_itinerary)
from skewlab.errors import DegreeMismatch, OverflowBudget, ValidationError


@pytest.mark.parametrize("l", [0, 1, -2, 2.5])
def test_degree_rejected(l):
    with pytest.raises(ValidationError):
        ExpandingBase(l)


@pytest.mark.parametrize("l, x, expected", [(2, 0, 0), (2, 0.3, 0.6), (3, 0.5, 0.5)])
def test_forward_examples(l, x, expected):
    assert forward(ExpandingBase(l), x) == pytest.approx(expected, abs=1e-15)


def test_forward_exact_mode():
    assert forward(3, Fraction(5, 7)) == Fraction(1, 7)


def test_backward_orbit_examples():
    assert backward_orbit(2, 0, Itinerary.zeros(2), 3) == [0, 0, 0]
    ones = backward_orbit(2, Fraction(0), Itinerary.constant(2, 1), 3)
    assert ones == [Fraction(1, 2), Fraction(3, 4), Fraction(7, 8)]
    it = Itinerary(2, (1,), (0,))
    assert backward_orbit(2, 0.5, it, 2) == pytest.approx([0.75, 0.375])


def test_backward_orbit_rejects_mismatch():
    with pytest.raises(DegreeMismatch):
        backward_orbit(3, 0.1, Itinerary.zeros(2), 2)


def test_periodic_points_examples():
    assert periodic_points(2, 1).points == (Fraction(0),)
    p2 = periodic_points(2, 2)
    assert set(p2.points) == {Fraction(0), Fraction(1, 3), Fraction(2, 3)}
    assert {frozenset(o) for o in p2.orbits} == {frozenset({0}), frozenset({Fraction(1, 3), Fraction(2, 3)})}
    p3 = periodic_points(2, 3)
    assert frozenset({Fraction(1, 7), Fraction(2, 7), Fraction(4, 7)}) in {frozenset(o) for o in p3.orbits}


@pytest.mark.parametrize("l, n", [(2, 6), (3, 4), (5, 3)])
def test_periodic_points_are_periodic(l, n):
    pp = periodic_points(l, n)
    assert len(pp.points) == l**n - 1
    assert all(is_periodic(l, p, n) for p in pp.points)
    for orbit, period in zip(pp.orbits, pp.minimal_periods):
        assert n % period == 0 and len(orbit) == period
        assert is_periodic(l, orbit[0], period)


def test_periodic_points_budget():
    with pytest.raises(OverflowBudget):
        periodic_points(2, 12, budget=1000)
    with pytest.raises(ValidationError):
        periodic_points(2, 13)


def test_distance_examples():
    a = Itinerary(2, (1, 0, 1), (0, 1))
    assert itinerary_distance(a, a) == 0
    assert itinerary_distance(Itinerary.zeros(2), Itinerary.constant(2, 1)) == 1
    assert itinerary_distance(Itinerary(2, (1,), (0,)), Itinerary.zeros(2)) == Fraction(1, 2)
    with pytest.raises(DegreeMismatch):
        itinerary_distance(Itinerary.zeros(2), Itinerary.zeros(3))


def test_itinerary_canonical_form():
    assert Itinerary(2, (0, 1, 1), (1,)) == Itinerary(2, (0,), (1,))
    assert Itinerary(2, (), (1, 1)) == Itinerary.constant(2, 1)
    assert Itinerary(3, (2, 1, 2), (1, 2)) == Itinerary(3, (2,), (1, 2))
    assert Itinerary(2, (1,), (0,)).shift() == Itinerary.zeros(2)
    assert Itinerary.zeros(2).prepend(1).digits(3).tolist() == [1, 0, 0]
    with pytest.raises(ValidationError):
        Itinerary(2, (2,), (0,))


def test_preimage_digit_and_branch():
    for x in (Fraction(3, 8), Fraction(5, 7)):
        d = preimage_digit(2, x)
        assert branch(2, d, forward(2, x)) == x


# -- properties ------------------------------------------------------------


@st.composite
def itineraries(draw, l=2):
    prefix = draw(st.lists(st.integers(0, l - 1), max_size=10))
    tail = draw(st.lists(st.integers(0, l - 1), min_size=1, max_size=4))
    return Itinerary(l, tuple(prefix), tuple(tail))


@given(itineraries(), itineraries(), itineraries())
def test_distance_is_metric(a, b, c):
    dab, dba = itinerary_distance(a, b), itinerary_distance(b, a)
    assert dab == dba >= 0
    assert (dab == 0) == (a == b)
    assert itinerary_distance(a, c) <= dab + itinerary_distance(b, c)


@given(itineraries(), itineraries())
def test_equality_matches_digit_streams(a, b):
    n = 40
    same = a.digits(n).tolist() == b.digits(n).tolist()
    assert (a == b) == same


@given(st.integers(2, 6), st.fractions(min_value=0, max_value=Fraction(999, 1000)), st.data())
def test_backward_orbit_inverts_forward_exactly(l, x, data):
    prefix = data.draw(st.lists(st.integers(0, l - 1), min_size=1, max_size=8))
    it = Itinerary(l, tuple(prefix), (0,))
    orbit = backward_orbit(l, x, it, 8)
    prev = x
    for p in orbit:
        assert forward(l, p) == prev
        prev = p


@given(st.floats(0, 1, exclude_max=True), st.integers(0, 2**32 - 1))
def test_backward_orbit_inverts_forward_float(x, seed):
    it = random_itinerary(3, np.random.default_rng(seed), 10)
    orbit = backward_orbit(3, x, it, 10)
    prev = x
    for p in orbit:
        assert abs(forward(3, p) - prev) < 1e-14 or abs(abs(forward(3, p) - prev) - 1) < 1e-14
        prev = p
