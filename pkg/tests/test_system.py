import math

import numpy as np
import pytest

from skewlab import kernels
from skewlab.kernels import _numpy
from skewlab.ergodicity import sample_points
from skewlab.errors import ConeViolation, ValidationError
from skewlab.fourier import CircleFunction
from skewlab.system import Perturbation, build_system, check_jacobian, cone_width, iterate

PHI = CircleFunction.sin(1, 0.5)
SHEAR = CircleFunction.sin(1, 1 / (2 * math.pi))


def test_iterate_examples():
    zero = build_system(2, CircleFunction.constant(0))
    assert np.array_equal(iterate(zero, (0.0, 0.0), 5), np.zeros((5, 2)))
    pts = iterate(zero, (1 / 3, 0.2), 2)
    assert pts[:, 0] == pytest.approx([2 / 3, 1 / 3], abs=1e-15)
    assert pts[:, 1] == pytest.approx([0.2, 0.2])
    lam = 0.5
    p = iterate(build_system(2, CircleFunction.sin(1, lam)), (0.25, 0.0), 1)
    assert p[0] == pytest.approx([0.5, lam])


def test_iterate_stride():
    s = build_system(3, PHI)
    full = iterate(s, (0.1, 0.2), 12)
    assert np.array_equal(iterate(s, (0.1, 0.2), 12, stride=4), full[3::4])


def test_iterate_base_orbit_error_doubles():
    # the float 1/3 is off by less than 1e-16 and the lattice rounding is far
    # smaller, so the doubling map tracks the period-2 orbit with error 2^k 1e-16
    s = build_system(2, CircleFunction.constant(0))
    xs = iterate(s, (1 / 3, 0.0), 40)[:, 0]
    expected = np.tile([2 / 3, 1 / 3], 20)
    err = np.abs(xs - expected)
    bound = 2.0 ** np.arange(1, 41) * 1e-16
    assert np.all(err <= bound)


def test_float_map_agrees_with_kernel_one_step():
    s = build_system(2, PHI, {"q": SHEAR, "r": SHEAR, "eps": 0.01})
    z = (0.3125, 0.4)
    k = iterate(s, z, 1)[0]
    assert np.allclose(k, s.apply(*z), atol=1e-15)


def test_build_rejects():
    with pytest.raises(ValidationError):
        build_system(1, PHI)
    with pytest.raises(ValidationError):
        build_system(2, PHI, Perturbation(SHEAR, SHEAR, -0.1))
    with pytest.raises(ValidationError):
        build_system(2, CircleFunction.from_dict({1: 1.0}))


def test_eps_zero_is_plain_map():
    s = build_system(2, PHI, {"q": SHEAR, "r": SHEAR, "eps": 0.0})
    assert s.perturbation is None and s.eps == 0


def test_small_shear_accepted():
    s = build_system(2, PHI, {"q": SHEAR, "r": SHEAR, "eps": 0.01})
    assert s.cone_margin > 0 and s.min_expansion > 1.5


def test_large_shear_rejected():
    with pytest.raises(ConeViolation):
        build_system(2, PHI, {"q": CircleFunction.sin(1), "r": CircleFunction.sin(1), "eps": 10})


def test_unnormalized_shear_has_complex_fixed_point():
    # q = sin 2 pi x, r = sin 2 pi y at eps = 0.01 rotates near (0, 1/2), so
    # no invariant cone exists and the construction is refused
    with pytest.raises(ConeViolation):
        build_system(2, PHI, {"q": CircleFunction.sin(1), "r": CircleFunction.sin(1), "eps": 0.01})
    s = build_system(2, PHI)
    object.__setattr__(s, "perturbation", Perturbation(CircleFunction.sin(1), CircleFunction.sin(1), 0.01))
    J = s.jacobian(np.array(0.0), np.array(0.5))
    assert np.iscomplex(np.linalg.eigvals(J)).all()


def test_jacobian_is_degree():
    s = build_system(3, PHI, {"q": SHEAR, "r": SHEAR * 2, "eps": 0.02})
    assert check_jacobian(s, 128) < 1e-12


def test_cone_width():
    assert cone_width(PHI, 2) == pytest.approx(math.pi + 1)


@pytest.mark.parametrize("eps", [0.0, 0.01])
def test_volume_preservation(eps):
    s = build_system(2, PHI, {"q": SHEAR, "r": SHEAR, "eps": eps})
    x, y = sample_points(11, 200_000)
    args = s.kernel_args()
    n = x.size
    expected = n / 256
    for step in range(1, 31):
        x, y = _numpy.step(x, y, *args)
        counts, _, _ = np.histogram2d(kernels.to_float(x), y, bins=16, range=[[0, 1], [0, 1]])
        chi = float(np.sum((counts - expected) ** 2) / expected)
        # chi-square with 255 dof: mean 255, sd ~22.6
        assert chi < 255 + 6 * 22.6, (step, chi)
    # the x-marginal stays uniform: Kolmogorov-Smirnov at the 1% level
    xs = np.sort(kernels.to_float(x))
    ks = np.max(np.abs(xs - np.arange(1, n + 1) / n))
    assert ks < 1.63 / math.sqrt(n)
