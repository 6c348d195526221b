"""Unstable directions of f(x, y) = (l x, y + phi(x)) and their certificates.

For a point z = (x, y) and a past chosen by an itinerary, the unstable
direction is spanned by (1, eta) with eta = sum_{j>=1} phi'(x_{-j}) / l^j.
Truncated sums carry a rigorous tail bound, and accessibility witnesses are
reported only when the gap between two pasts exceeds the sum of the bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import mpmath
import numpy as np

from . import kernels
from .circle_maps import Itinerary, backward_orbit
from .errors import BudgetExhausted, DegreeMismatch, ValidationError
from .fourier import CircleFunction, roundoff_bound, sup_norm

_EPS = np.finfo(float).eps
WITNESS_GRID = 256
WITNESS_PREFIX = 8
WITNESS_TARGET = 1e-12
SEARCH_BUDGET = 4_000_000
LEAF_SAMPLES = 1024
PREFIX_CHUNK = 64
MAX_REFINEMENTS = 8
GUARD_BITS = 64
MAX_BITS = 4096


@dataclass(frozen=True)
class CertifiedValue:
    """A truncated series value with its tail bound.

    ``error_bound`` is the analytic truncation tail; ``roundoff`` bounds the
    arithmetic error of the partial sum. Certified comparisons use both.
    ``value`` is an ``mpmath.mpf`` when the sum was carried out in extended
    precision (see :func:`eta_estimate`), otherwise a float.
    """

    value: float
    error_bound: float
    roundoff: float = 0.0

    @property
    def total_error(self) -> float:
        return self.error_bound + self.roundoff

    @property
    def interval(self) -> tuple[float, float]:
        return self.value - self.total_error, self.value + self.total_error

    def certifies_positive(self) -> bool:
        return self.value - self.total_error > 0

    def to_dict(self) -> dict:
        out = {"value": float(self.value), "error_bound": self.error_bound, "roundoff": self.roundoff}
        if isinstance(self.value, mpmath.mpf):
            out["value_digits"] = mpmath.nstr(self.value, 40)
        return out


def depth_for(l: int, target: float = WITNESS_TARGET) -> int:
    """Smallest N with l^-N <= target."""
    return max(1, math.ceil(-math.log(target) / math.log(l) - 1e-9))


def eta_tail_bound(phi: CircleFunction, l: int, N: int) -> float:
    return sup_norm(phi.derivative()).bound * float(l) ** (-N) / (l - 1)


def _eta_roundoff(dphi: CircleFunction, l: int, N: int) -> float:
    if dphi.degree == 0:
        return 0.0
    per_term = roundoff_bound(dphi) + 2 * N * _EPS * dphi.l1_norm()
    return float(per_term / (l - 1))


def h_tail_bound(psi: CircleFunction, l: int, x: float, N: int) -> float:
    """Lip(psi) |x| l^-2N / (l^2 - 1) * l^2, with Lip(psi) <= l1 norm of psi'."""
    lip = sup_norm(psi.derivative()).bound
    return lip * abs(x) * float(l) ** (-2 * N) / (l * l - 1) * l * l


def _check(it: Itinerary, l: int, N: int) -> None:
    if it.degree != l:
        raise DegreeMismatch(f"itinerary degree {it.degree} != {l}")
    if N < 1:
        raise ValidationError("depth N must be >= 1")


def _working_bits(l: int, N: int, x: float = 1.0) -> int:
    """Enough bits that rounding stays far below a tail of size |x| l^-N."""
    scale = max(0, -math.floor(math.log2(abs(x)))) if x else 0
    return min(MAX_BITS, 53 + GUARD_BITS + math.ceil(N * math.log2(l)) + scale)


def _mp_roundoff(f: CircleFunction, N: int, bits: int) -> float:
    """Bound on the accumulated rounding of N extended-precision evaluations of f."""
    return float(N * (4 * f.degree + 8) * max(f.l1_norm(), 1.0) * 2.0 ** -bits)


def _mp_series(f: CircleFunction, l: int, points) -> mpmath.mpf:
    """sum_j l^-j sign_j f(t_j) for exact rational points, at the current precision."""
    half = f.half()
    coeffs = [(k, mpmath.mpf(c.real), mpmath.mpf(c.imag)) for k, c in enumerate(half) if k and c != 0]
    total = mpmath.mpf(0)
    w = mpmath.mpf(1)
    inv = 1 / mpmath.mpf(l)
    for group in points:
        w *= inv
        acc = mpmath.mpf(0)
        for sign, t in group:
            t = mpmath.mpf(t.numerator) / t.denominator
            v = mpmath.mpf(half[0].real)
            for k, re, im in coeffs:
                v += 2 * (re * mpmath.cospi(2 * k * t) - im * mpmath.sinpi(2 * k * t))
            acc += sign * v
        total += w * acc
    return total


def eta_estimate(phi: CircleFunction, l: int, x: float, it: Itinerary, N: int) -> CertifiedValue:
    """sum_{j=1}^{N} phi'(x_{-j}) / l^j along the past of x selected by ``it``.

    The preimages are exact rationals and the sum is carried out with about
    N log2(l) + 117 bits, so the rounding is negligible next to the tail
    bound and partial sums at different depths differ only by their tails.
    """
    _check(it, l, N)
    dphi = phi.derivative()
    if dphi.degree == 0:
        return CertifiedValue(0.0, 0.0)
    xs = backward_orbit(l, Fraction(float(x) % 1.0), it, N)
    bits = _working_bits(l, N)
    with mpmath.workprec(bits):
        value = _mp_series(dphi, l, [((1, t),) for t in xs])
    return CertifiedValue(value, eta_tail_bound(phi, l, N), _mp_roundoff(dphi, N, bits))


def h_value(psi: CircleFunction, l: int, it: Itinerary, x: float, N: int) -> CertifiedValue:
    """sum_{n=1}^{N} l^-n (psi(tau_n x) - psi(tau_n 0)) on the real line.

    Evaluated like :func:`eta_estimate`, with twice the depth in bits since
    the tail bound decays like l^-2N.
    """
    _check(it, l, N)
    x = float(x)
    if psi.degree == 0 or x == 0.0:
        return CertifiedValue(0.0, 0.0)
    a = backward_orbit(l, Fraction(x), it, N)
    b = backward_orbit(l, Fraction(0), it, N)
    bits = _working_bits(l, 2 * N, x)
    with mpmath.workprec(bits):
        value = _mp_series(psi, l, [((1, p), (-1, q)) for p, q in zip(a, b)])
    return CertifiedValue(value, h_tail_bound(psi, l, x, N), 2 * _mp_roundoff(psi, N, bits))


def unstable_angle(eta_a: float, eta_b: float) -> float:
    """Angle between span{(1, eta_a)} and span{(1, eta_b)}."""
    return abs(math.atan(eta_a) - math.atan(eta_b))


# ---------------------------------------------------------------------------
# accessibility witnesses


@dataclass(frozen=True)
class AccessibilityWitness:
    x: float
    itinerary_pair: tuple  # (a, b)
    gap: CertifiedValue
    angle: float
    kind: str  # "eta" or "h"
    eta_pair: tuple
    depth: int
    candidates_checked: int

    def to_dict(self) -> dict:
        a, b = self.itinerary_pair
        return {
            "found": True,
            "x": self.x,
            "itinerary_a": str(a),
            "itinerary_b": str(b),
            "gap": self.gap.to_dict(),
            "certified_margin": self.gap.value - self.gap.total_error,
            "angle": self.angle,
            "kind": self.kind,
            "eta_pair": list(self.eta_pair),
            "depth": self.depth,
            "candidates_checked": self.candidates_checked,
        }


@dataclass(frozen=True)
class NotFound:
    max_gap: float
    error_floor: float
    candidates_checked: int
    budget_exhausted: bool = False
    max_prefix: int = 0

    def to_dict(self) -> dict:
        return {
            "found": False,
            "max_gap": self.max_gap,
            "error_floor": self.error_floor,
            "candidates_checked": self.candidates_checked,
            "budget_exhausted": self.budget_exhausted,
            "max_prefix": self.max_prefix,
        }


def canonical_prefixes(l: int, length: int) -> np.ndarray:
    """Digit strings of the given length whose last digit is nonzero, lexicographic."""
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    rows = [p + (d,) for p in product(range(l), repeat=length - 1) for d in range(1, l)]
    return np.array(rows, dtype=np.int64).reshape(-1, length)


def _level_table(xs, prefixes, N, l, dphi_half, threads):
    width = max(prefixes.shape[1], 1)
    padded = np.zeros((prefixes.shape[0], width), dtype=np.int64)
    padded[:, :prefixes.shape[1]] = prefixes
    lengths = np.full(prefixes.shape[0], prefixes.shape[1], dtype=np.int64)
    chunks = [slice(i, min(i + PREFIX_CHUNK, len(padded))) for i in range(0, len(padded), PREFIX_CHUNK)]
    k = kernels.get()
    parts = kernels.run_sharded(
        lambda sl: k.series_table(xs, padded[sl], lengths[sl], int(N), np.int64(l), dphi_half), chunks, threads)
    return np.vstack([p[0] for p in parts]), np.vstack([p[1] for p in parts])


def accessibility_witness(phi: CircleFunction, l: int, max_prefix: int = WITNESS_PREFIX,
                          grid: int = WITNESS_GRID, N: int | None = None,
                          search_budget: int = SEARCH_BUDGET, threads: int | None = None):
    """First (prefix, x) whose past gives a certified gap against the all-zeros past.

    Candidates run over prefix lengths 1..max_prefix (shortest first,
    lexicographic, zero tail) and, for each prefix, over x = k/grid. At each
    candidate the eta gap at the torus point x is tested before the h gap
    at the real lift x. Returns AccessibilityWitness or NotFound.
    """
    if int(l) != l or l < 2:
        raise ValidationError(f"degree must be an integer >= 2, got {l!r}")
    l = int(l)
    N = depth_for(l) if N is None else int(N)
    dphi = phi.derivative()
    xs = np.arange(grid, dtype=float) / grid
    eta_err = eta_tail_bound(phi, l, N)
    eta_round = _eta_roundoff(dphi, l, N)
    h_err = np.array([h_tail_bound(dphi, l, x, N) for x in xs])
    h_round = 2 * _eta_roundoff(dphi, l, N)
    eta_floor = 2 * (eta_err + eta_round)
    h_floor = 2 * (h_err + h_round)

    if dphi.degree == 0:
        return NotFound(0.0, 0.0, 0, False, max_prefix)

    half = dphi.half()
    eta0, h0 = _level_table(xs, canonical_prefixes(l, 0), N, l, half, 1)
    checked = 0
    max_gap = 0.0
    for length in range(1, max_prefix + 1):
        prefixes = canonical_prefixes(l, length)
        if checked + prefixes.shape[0] * grid > search_budget:
            return NotFound(max_gap, float(max(eta_floor, h_floor.max())), checked, True, max_prefix)
        eta, h = _level_table(xs, prefixes, N, l, half, threads)
        eta_gap = np.abs(eta - eta0)
        h_gap = np.abs(h - h0)
        ok = (eta_gap - eta_floor > 0) | (h_gap - h_floor > 0)
        hits = np.flatnonzero(ok.ravel())
        if hits.size:
            idx = int(hits[0])
            c, g = divmod(idx, grid)
            a = Itinerary(l, tuple(prefixes[c]), (0,))
            pair = (float(eta[c, g]), float(eta0[0, g]))
            if eta_gap[c, g] - eta_floor > 0:
                gap = CertifiedValue(float(eta_gap[c, g]), 2 * eta_err, 2 * eta_round)
                kind = "eta"
            else:
                gap = CertifiedValue(float(h_gap[c, g]), 2 * float(h_err[g]), 2 * h_round)
                kind = "h"
            return AccessibilityWitness(
                x=float(xs[g]), itinerary_pair=(a, Itinerary.zeros(l)), gap=gap,
                angle=unstable_angle(*pair), kind=kind, eta_pair=pair, depth=N,
                candidates_checked=checked + idx + 1)
        checked += prefixes.shape[0] * grid
        max_gap = max(max_gap, float(eta_gap.max()), float(h_gap.max()))
    return NotFound(max_gap, float(max(eta_floor, h_floor.max())), checked, False, max_prefix)


def require_witness(result):
    """Raise BudgetExhausted for an exhausted search, else pass the result through."""
    if isinstance(result, NotFound) and result.budget_exhausted:
        raise BudgetExhausted(f"search budget exhausted after {result.candidates_checked} candidates")
    return result


# ---------------------------------------------------------------------------
# leaves


@dataclass
class Leaf:
    lift: np.ndarray  # (m, 2) points on the universal cover, z at ``center``
    arclength: np.ndarray  # signed, zero at z
    center: int
    slope: float
    eta: CertifiedValue
    discretization_error: float
    depth: int
    refinements: int = 0
    z: tuple = field(default=(0.0, 0.0))

    @property
    def torus(self) -> np.ndarray:
        return np.mod(self.lift, 1.0)

    def rows(self):
        for (x, y), s in zip(self.torus, self.arclength):
            yield x, y, s

    def summary(self) -> dict:
        return {
            "z": list(self.z),
            "depth": self.depth,
            "samples": int(self.lift.shape[0]),
            "slope_at_z": self.slope,
            "eta": self.eta.to_dict(),
            "discretization_error": self.discretization_error,
            "refinements": self.refinements,
        }


def grow_unstable_leaf(phi: CircleFunction, l: int, z, it: Itinerary, n: int = 30,
                       half_width: float = 0.05, samples: int = LEAF_SAMPLES) -> Leaf:
    """Local unstable leaf through z for the past ``it``, as a sampled curve.

    A horizontal segment of half-width half_width / l^n is placed at the
    depth-n preimage of z along ``it`` and pushed forward n times by the
    lift. Wherever the arclength between consecutive samples exceeds twice
    the seed spacing in x, seed midpoints are inserted and pushed again.
    """
    _check(it, l, n)
    if not 0 < half_width < 0.5:
        raise ValidationError("half_width must lie in (0, 1/2)")
    samples = max(5, samples)
    x0, y0 = float(z[0]) % 1.0, float(z[1]) % 1.0
    digits = it.digits(n)
    px, py = x0, y0
    for d in digits:
        px = (px + d) / l
        py = py - float(phi.evaluate(px))
    scale = float(l) ** n
    seeds = np.linspace(-half_width, half_width, samples) / scale
    seeds = np.union1d(seeds, [0.0])

    def forward(s):
        x = px + s
        y = np.full_like(s, py)
        for d in digits[::-1]:
            y = y + phi.evaluate(x)
            x = l * x - d
        return x, y

    x, y = forward(seeds)
    spacing = 2 * half_width / (samples - 1)
    refinements = 0
    for _ in range(MAX_REFINEMENTS):
        long = np.flatnonzero(np.hypot(np.diff(x), np.diff(y)) > 2 * spacing)
        if long.size == 0:
            break
        seeds = np.sort(np.concatenate([seeds, 0.5 * (seeds[long] + seeds[long + 1])]))
        x, y = forward(seeds)
        refinements += 1
    c = int(np.flatnonzero(seeds == 0.0)[0])
    arc = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(x), np.diff(y)))])
    arc -= arc[c]
    s1 = (y[c + 1] - y[c - 1]) / (x[c + 1] - x[c - 1])
    s2 = (y[c + 2] - y[c - 2]) / (x[c + 2] - x[c - 2]) if 2 <= c < len(x) - 2 else s1
    return Leaf(
        lift=np.column_stack([x, y]),
        arclength=arc,
        center=c,
        slope=float(s1),
        eta=eta_estimate(phi, l, x0, it, n),
        discretization_error=float(abs(s1 - s2)),
        depth=n,
        refinements=refinements,
        z=(x0, y0),
    )
