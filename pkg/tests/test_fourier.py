import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corpus import random_trig
from skewlab.errors import InsufficientSamples, ValidationError
from skewlab.fourier import (CircleFunction, fit_from_samples, from_json_dict, parse_function, parse_shorthand,
                             roundoff_bound, sup_norm, to_json_dict)

TWO_PI = 2 * math.pi


def test_evaluate_examples():
    assert CircleFunction.sin(1).evaluate(0.25) == pytest.approx(1.0, abs=1e-15)
    assert CircleFunction.constant(3).evaluate(0.77) == 3
    f = CircleFunction.cos(2) - CircleFunction.cos(1)
    assert f.evaluate(0.5) == pytest.approx(2.0, abs=1e-14)


def test_coefficient_convention():
    s = CircleFunction.sin(1, 0.5)
    assert s.coeff(1) == pytest.approx(-0.25j)
    assert s.coeff(-1) == pytest.approx(0.25j)
    xs = np.arange(64) / 64
    assert np.fft.fft(s.evaluate(xs))[1] / 64 == pytest.approx(s.coeff(1), abs=1e-15)


def test_complex_function_evaluation():
    f = CircleFunction.from_dict({1: 1.0})
    assert not f.real
    assert f.evaluate(0.25) == pytest.approx(1j)


def test_derivative_examples():
    assert CircleFunction.constant(4).derivative().support() == []
    d = CircleFunction.sin(1).derivative()
    assert d == CircleFunction.cos(1, TWO_PI)
    d2 = CircleFunction.cos(2).derivative()
    assert np.allclose(d2.coeffs, CircleFunction.sin(2, -2 * TWO_PI).coeffs, atol=1e-15)


def test_fit_examples():
    xs = np.arange(16) / 16
    f = fit_from_samples(np.sin(TWO_PI * xs), 1)
    assert f.coeff(1) == pytest.approx(-0.5j, abs=1e-15)
    assert f.coeff(-1) == pytest.approx(0.5j, abs=1e-15)
    assert f.aliasing_residual < 1e-12
    c = fit_from_samples(np.full(16, 2.5), 3)
    assert c.support() == [0] and c.mean == pytest.approx(2.5)
    alias = fit_from_samples(np.cos(3 * TWO_PI * xs), 1)
    assert alias.aliasing_residual > 0.5
    with pytest.raises(InsufficientSamples):
        fit_from_samples(np.zeros(4), 2)


def test_sup_norm_examples():
    n = sup_norm(CircleFunction.sin(1))
    assert n.bound == pytest.approx(1.0) and n.sampled == pytest.approx(1.0)
    assert sup_norm(CircleFunction.constant(-2.5)).bound == 2.5
    m = sup_norm(CircleFunction.cos(1) + CircleFunction.cos(2))
    assert m.bound <= 2 + 1e-15 and m.sampled == pytest.approx(2.0)


def test_kmax_enforced():
    with pytest.raises(ValidationError):
        CircleFunction.cos(200)


def test_real_flag_requires_symmetry():
    with pytest.raises(ValidationError):
        CircleFunction.from_dict({1: 1.0}, real=True)


def test_shorthand():
    assert parse_shorthand("0.5*sin") == CircleFunction.sin(1, 0.5)
    assert parse_shorthand("cos2 - cos1") == CircleFunction.cos(2) - CircleFunction.cos(1)
    assert parse_shorthand("constant:3") == CircleFunction.constant(3)
    assert parse_shorthand("1 + 2 sin3") == CircleFunction.sin(3, 2) + 1
    for bad in ("", "tan", "sin cos", "constant:x"):
        with pytest.raises(ValidationError):
            parse_shorthand(bad)


def test_json_round_trip(tmp_path):
    f = CircleFunction.sin(1, 0.5) + CircleFunction.cos(3, 0.25) + 1
    data = to_json_dict(f, 2)
    path = tmp_path / "phi.json"
    path.write_text(json.dumps(data))
    g, l = parse_function(str(path))
    assert l == 2 and g == f


def test_json_loader_fills_and_rejects():
    f, _ = from_json_dict({"fourier": [[1, 0.0, -0.25]]})
    assert f == CircleFunction.sin(1, 0.5)
    with pytest.raises(ValidationError):
        from_json_dict({"fourier": [[1, 0.0, -0.25], [-1, 0.0, -0.25]]})
    with pytest.raises(ValidationError):
        from_json_dict({"fourier": [[0, 1.0, 1.0]]})
    with pytest.raises(ValidationError):
        from_json_dict({"l": 1, "fourier": []})


def test_evaluate_rational_matches_float():
    f = CircleFunction.sin(1, 0.5) + CircleFunction.cos(5, 0.1)
    ks = np.arange(31)
    assert np.allclose(f.evaluate_rational(ks, 31), f.evaluate(ks / 31), atol=1e-14)


# -- properties ------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


@given(seeds)
def test_fit_round_trip(seed):
    f = random_trig(np.random.default_rng(seed), 16)
    N = 64
    g = fit_from_samples(f.evaluate(np.arange(N) / N), f.degree)
    assert np.max(np.abs(g.coeffs - f.coeffs)) < 1e-12


@given(seeds)
def test_derivative_then_integral(seed):
    f = random_trig(np.random.default_rng(seed), 16)
    g = f.derivative().antiderivative()
    assert np.max(np.abs((g - f.without_mean()).coeffs)) < 1e-12


@given(seeds)
def test_sup_bound_dominates_grid(seed):
    f = random_trig(np.random.default_rng(seed), 16)
    grid = np.arange(4096) / 4096
    assert sup_norm(f).bound >= np.max(np.abs(f.evaluate(grid)))


@given(seeds, st.floats(0, 1, exclude_max=True))
def test_roundoff_bound_covers_evaluation(seed, x):
    f = random_trig(np.random.default_rng(seed), 16)
    ks = np.arange(-f.degree, f.degree + 1)
    exact = np.real(np.sum(f.coeffs * np.exp(2j * np.pi * ks * x)))
    assert abs(f.evaluate(x) - exact) <= roundoff_bound(f) + 1e-15


@given(seeds, st.integers(2, 5))
def test_compose_power(seed, l):
    f = random_trig(np.random.default_rng(seed), 8)
    xs = np.linspace(0, 1, 33)
    assert np.allclose(f.compose_power(l).evaluate(xs), f.evaluate((l * xs) % 1), atol=1e-12)
