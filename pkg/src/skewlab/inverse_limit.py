"""Branch maps on the universal cover, itinerary orbits and re-indexing.

The lift of f is F(x, y) = (l x, y + phi(x)) with linear part A = diag(l, 1).
The integer translations n_i = (i, 0), 0 <= i < l, are the lattice points of
A([0, 1)^2), and F_i^{-1}(p) = F^{-1}(p + n_i) picks the i-th preimage.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .circle_maps import Itinerary
from .errors import DegreeMismatch, InconsistentEvidence, ValidationError
from .ergodicity import _draw, _sample_shards
from .fourier import CircleFunction
from .system import SkewSystem

CYLINDER_SAMPLES = 1_000_000


@dataclass(frozen=True)
class LinearModel:
    l: int
    phi: CircleFunction | None = None

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 2:
            raise ValidationError(f"degree must be an integer >= 2, got {self.l!r}")
        object.__setattr__(self, "l", int(self.l))

    @property
    def A(self) -> np.ndarray:
        return np.array([[self.l, 0], [0, 1]], dtype=np.int64)

    def translation(self, i: int) -> tuple[int, int]:
        if not 0 <= i < self.l:
            raise ValidationError(f"digit {i} outside 0..{self.l - 1}")
        return (i, 0)

    def translations(self) -> list[tuple[int, int]]:
        return [(i, 0) for i in range(self.l)]

    def image_lattice_points(self) -> list[tuple[int, int]]:
        """Integer points of A([0, 1)^2), enumerated directly."""
        pts = []
        for a in range(-1, self.l + 1):
            for b in range(-1, 2):
                # (a, b) = A(s, t) with s = a / l, t = b
                if 0 <= Fraction(a, self.l) < 1 and 0 <= b < 1:
                    pts.append((a, b))
        return pts

    def phi_at(self, x):
        if self.phi is None or (self.phi.degree == 0 and self.phi.mean == 0):
            return Fraction(0) if isinstance(x, Fraction) else 0.0
        if isinstance(x, Fraction):
            return self.phi.evaluate_fraction(x)
        return float(self.phi.evaluate(x))


def branch_inverse(model: LinearModel, i: int, p) -> tuple:
    """F^{-1}(p + n_i) = ((p1 + i) / l, p2 - phi((p1 + i) / l))."""
    model.translation(i)
    x = (p[0] + i) / model.l if isinstance(p[0], float) else Fraction(p[0] + i) / model.l
    return (x, p[1] - model.phi_at(x))


def lift_forward(model: LinearModel, p) -> tuple:
    """F(p) = (l p1, p2 + phi(p1))."""
    return (model.l * p[0], p[1] + model.phi_at(p[0]))


def _torus(p) -> tuple:
    return (p[0] % 1, p[1] % 1)


@dataclass(frozen=True)
class LiftedOrbit:
    base: tuple
    digits: tuple
    lifts: tuple  # F_{a_1}^{-1}(base), F_{a_2}^{-1} F_{a_1}^{-1}(base), ...

    @property
    def torus(self) -> list:
        return [_torus(p) for p in self.lifts]


def itinerary_orbit(model: LinearModel, x0, a: Itinerary, n: int) -> LiftedOrbit:
    """Depth-n lifted backward orbit of the fundamental-domain lift of x0."""
    if a.degree != model.l:
        raise DegreeMismatch(f"itinerary degree {a.degree} != {model.l}")
    if n < 1:
        raise ValidationError("depth must be >= 1")
    p = _torus(tuple(Fraction(c) if isinstance(c, (int, Fraction, str)) else c for c in x0))
    base = p
    lifts = []
    for i in range(1, n + 1):
        p = branch_inverse(model, a.digit(i), p)
        lifts.append(p)
    return LiftedOrbit(base, tuple(int(d) for d in a.digits(n)), tuple(lifts))


# ---------------------------------------------------------------------------
# re-indexing


@dataclass(frozen=True)
class ReindexResult:
    digits: tuple  # b_1..b_n
    offsets: tuple  # e_k = (b-chain lift) - (a-chain lift) after k steps, e_0 = -m0
    itinerary: Itinerary | None  # the full re-indexed itinerary when it closes up
    recursion_holds: bool  # n_{b_k} = n_{a_k} + A e_k - e_{k-1} for every k
    printed_form_steps: tuple  # steps k where n_{b_k} = e_{k-1}' + n_{a_k} + A e_k with e_0' = m0, e_j' = e_j

    @property
    def translations(self) -> tuple:
        return self.offsets[1:]

    def to_dict(self) -> dict:
        return {
            "digits": list(self.digits),
            "translations": [list(e) for e in self.offsets[1:]],
            "m0": [-c for c in self.offsets[0]],
            "itinerary": str(self.itinerary) if self.itinerary is not None else None,
            "recursion_holds": self.recursion_holds,
            "printed_form_steps": list(self.printed_form_steps),
        }


def _reindex_digits(l: int, a: Itinerary, e0: tuple, n: int):
    ex, ey = e0
    digits, offsets = [], [(ex, ey)]
    for k in range(1, n + 1):
        ak = a.digit(k)
        bk = (ak - ex) % l
        ex = (ex + bk - ak) // l
        digits.append(bk)
        offsets.append((ex, ey))
    return digits, offsets


def _close_itinerary(l: int, a: Itinerary, e0x: int) -> Itinerary:
    """Run the digit recursion until the state (offset, tail phase) repeats."""
    start = len(a.prefix)
    period = len(a.tail)
    ex = e0x
    digits = []
    seen = {}
    k = 1
    while True:
        if k > start:
            state = (ex, (k - start - 1) % period)
            if state in seen:
                j = seen[state]
                return Itinerary(l, tuple(digits[:j - 1]), tuple(digits[j - 1:]))
            seen[state] = k
        ak = a.digit(k)
        bk = (ak - ex) % l
        ex = (ex + bk - ak) // l
        digits.append(bk)
        k += 1


def reindex_itinerary(model: LinearModel, a: Itinerary, m0, n: int, x0=None,
                      verify: bool = True) -> ReindexResult:
    """Digits b_1..b_n with pi F_b^{-1}(x_#) = pi F_a^{-1}(x_# + m0) at every depth.

    The digit b_k is the unique one making the difference of the two lifted
    chains integral. The identity is checked in exact rational arithmetic at
    each step when ``verify`` is set (a nonzero phi is evaluated in floating
    point and only the x-components are then checked).
    """
    l = model.l
    if a.degree != l:
        raise DegreeMismatch(f"itinerary degree {a.degree} != {l}")
    if n < 1:
        raise ValidationError("depth must be >= 1")
    m0 = (int(m0[0]), int(m0[1]))
    digits, offsets = _reindex_digits(l, a, (-m0[0], -m0[1]), n)

    if verify:
        xs = (Fraction(0), Fraction(0)) if x0 is None else tuple(Fraction(c) % 1 for c in x0)
        pa = (xs[0] + m0[0], xs[1] + m0[1])
        pb = xs
        for k in range(1, n + 1):
            pa = branch_inverse(model, a.digit(k), pa)
            pb = branch_inverse(model, digits[k - 1], pb)
            dx = pb[0] - pa[0]
            dy = pb[1] - pa[1]
            ok = dx == offsets[k][0] and (dy == offsets[k][1] or model.phi is not None)
            if not ok:
                raise InconsistentEvidence(f"projection identity fails at step {k}: offset ({dx}, {dy})", None)

    recursion = True
    printed = []
    for k in range(1, n + 1):
        ak, bk = a.digit(k), digits[k - 1]
        ek, ep = offsets[k], offsets[k - 1]
        lhs = (bk, 0)
        if lhs != (ak + l * ek[0] - ep[0], ek[1] - ep[1]):
            recursion = False
        prev = m0 if k == 1 else ep
        if lhs == (prev[0] + ak + l * ek[0], prev[1] + ek[1]):
            printed.append(k)
    full = _close_itinerary(l, a, -m0[0])
    return ReindexResult(tuple(digits), tuple(offsets), full, recursion, tuple(printed))


# ---------------------------------------------------------------------------
# cylinders


@dataclass(frozen=True)
class CylinderEstimate:
    estimate: float
    stderr: float
    hits: int
    samples: int
    seed: int

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "stderr": self.stderr, "hits": self.hits,
                "samples": self.samples, "seed": self.seed}


def _boxes_array(boxes) -> np.ndarray:
    arr = np.asarray(boxes, dtype=float).reshape(-1, 4)
    if arr.shape[0] < 1:
        raise ValidationError("need at least one box")
    if np.any(arr[:, 1] < arr[:, 0]) or np.any(arr[:, 3] < arr[:, 2]):
        raise ValidationError("boxes must satisfy x0 <= x1 and y0 <= y1")
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValidationError("box edges must lie in [0, 1]")
    return arr


def cylinder_measure_estimate(system: SkewSystem, boxes, samples: int = CYLINDER_SAMPLES,
                              seed: int = 0, threads: int | None = None) -> CylinderEstimate:
    """Monte Carlo Lebesgue measure of {z : f^i(z) in A_i, i = 0..n}.

    Boxes are half-open rectangles [x0, x1) x [y0, y1); an edge at 1 covers
    the whole circle since coordinates live in [0, 1).
    """
    arr = _boxes_array(boxes)
    arr = np.where(arr == 1.0, 2.0, arr)
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    args = system.kernel_args()
    k = kernels.get()

    def run(shard):
        size, ss = shard
        x0, y0 = _draw(size, ss)
        return k.cylinder_hits(x0, y0, arr, *args)

    hits = int(sum(kernels.run_sharded(run, _sample_shards(seed, samples), threads)))
    p = hits / samples
    return CylinderEstimate(p, float(np.sqrt(p * (1 - p) / samples)), hits, samples, seed)

