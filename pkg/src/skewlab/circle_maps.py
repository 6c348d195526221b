"""The expanding base map T(x) = l*x mod 1 and the symbolic space of pasts.

Points are either floats in [0, 1) or :class:`fractions.Fraction` instances.
Every routine here keeps the mode of its input: feed it a Fraction and the
answer is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegreeMismatch, OverflowBudget, ValidationError

DEFAULT_PERIOD_CAP = 12
DEFAULT_POINT_BUDGET = 10_000_000


@dataclass(frozen=True)
class ExpandingBase:
    degree: int

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 2:
            raise ValidationError(f"degree must be an integer >= 2, got {self.degree!r}")
        object.__setattr__(self, "degree", int(self.degree))


def _as_base(base) -> ExpandingBase:
    return base if isinstance(base, ExpandingBase) else ExpandingBase(base)


def _mod1(x):
    if isinstance(x, Fraction):
        return x - (x.numerator // x.denominator)
    return x - math.floor(x)


def forward(base, x):
    """T(x) = l*x - floor(l*x)."""
    return _mod1(_as_base(base).degree * x)


def branch(base, digit: int, x):
    """Inverse branch tau_i(x) = (x + i) / l."""
    return (x + digit) / _as_base(base).degree


def preimage_digit(base, x) -> int:
    """Digit i with tau_i(T(x)) == x, i.e. floor(l*x)."""
    l = _as_base(base).degree
    if isinstance(x, Fraction):
        return int((l * x).numerator // (l * x).denominator)
    return min(int(math.floor(l * x)), l - 1)


# ---------------------------------------------------------------------------
# itineraries


def _primitive_block(block: tuple) -> tuple:
    n = len(block)
    for p in range(1, n + 1):
        if n % p == 0 and block[:p] * (n // p) == block:
            return block[:p]
    return block


@dataclass(frozen=True)
class Itinerary:
    """Element of {0, ..., l-1}^N stored as a finite prefix plus a periodic tail.

    The stored form is canonical (shortest prefix, primitive tail) so that
    dataclass equality coincides with equality of digit streams.
    """

    degree: int
    prefix: tuple = ()
    tail: tuple = (0,)

    def __post_init__(self):
        l = int(self.degree)
        if l < 2:
            raise ValidationError(f"degree must be >= 2, got {self.degree}")
        prefix = tuple(int(d) for d in self.prefix)
        tail = tuple(int(d) for d in self.tail)
        if not tail:
            raise ValidationError("tail block must be non-empty")
        for d in prefix + tail:
            if not 0 <= d < l:
                raise ValidationError(f"digit {d} outside 0..{l - 1}")
        tail = _primitive_block(tail)
        while prefix and prefix[-1] == tail[-1]:
            tail = (prefix[-1],) + tail[:-1]
            prefix = prefix[:-1]
        object.__setattr__(self, "degree", l)
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "tail", tail)

    @classmethod
    def constant(cls, degree: int, digit: int) -> "Itinerary":
        return cls(degree, (), (digit,))

    @classmethod
    def zeros(cls, degree: int) -> "Itinerary":
        return cls(degree, (), (0,))

    def digit(self, i: int) -> int:
        """The i-th digit, 1-indexed."""
        if i < 1:
            raise IndexError("itineraries are 1-indexed")
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        return self.tail[(i - len(self.prefix) - 1) % len(self.tail)]

    def digits(self, n: int) -> np.ndarray:
        return np.array([self.digit(i) for i in range(1, n + 1)], dtype=np.int64)

    def shift(self) -> "Itinerary":
        if self.prefix:
            return Itinerary(self.degree, self.prefix[1:], self.tail)
        return Itinerary(self.degree, (), self.tail[1:] + self.tail[:1])

    def prepend(self, digit: int) -> "Itinerary":
        return Itinerary(self.degree, (digit,) + self.prefix, self.tail)

    def __str__(self):
        head = "".join(map(str, self.prefix))
        return f"{head}({''.join(map(str, self.tail))})^inf"


def random_itinerary(degree: int, rng: np.random.Generator, prefix_length: int = 96) -> Itinerary:
    """Uniform i.i.d. digits up to ``prefix_length``, zero tail afterwards."""
    return Itinerary(degree, tuple(rng.integers(0, degree, size=prefix_length)), (0,))


def itinerary_distance(a: Itinerary, b: Itinerary) -> Fraction:
    """d(a, b) = sum_i |a_i - b_i| / l^i, summed exactly."""
    if a.degree != b.degree:
        raise DegreeMismatch(f"degrees differ: {a.degree} vs {b.degree}")
    l = a.degree
    head = max(len(a.prefix), len(b.prefix))
    period = math.lcm(len(a.tail), len(b.tail))
    total = Fraction(0)
    for i in range(1, head + 1):
        total += Fraction(abs(a.digit(i) - b.digit(i)), l**i)
    block = Fraction(0)
    for i in range(head + 1, head + period + 1):
        block += Fraction(abs(a.digit(i) - b.digit(i)), l**i)
    return total + block / (1 - Fraction(1, l**period))


def backward_orbit(base, x, it: Itinerary, n: int) -> list:
    """(tau_{i,1}(x), ..., tau_{i,n}(x)) following the digits of ``it``."""
    l = _as_base(base).degree
    if it.degree != l:
        raise DegreeMismatch(f"itinerary degree {it.degree} != base degree {l}")
    if n < 1:
        raise ValidationError("depth must be >= 1")
    out = []
    for i in range(1, n + 1):
        x = (x + it.digit(i)) / l
        out.append(x)
    return out


# ---------------------------------------------------------------------------
# periodic points


@dataclass(frozen=True)
class PeriodicPoints:
    degree: int
    period: int
    points: tuple  # Fractions k/(l^n - 1)
    orbits: tuple  # tuples of Fractions along the forward orbit
    minimal_periods: tuple


def periodic_numerators(degree: int, n: int, budget: int = DEFAULT_POINT_BUDGET) -> tuple[np.ndarray, int]:
    """Numerators k and denominator q = l^n - 1 of every point with T^n(p) = p."""
    q = degree**n - 1
    if q > budget:
        raise OverflowBudget(f"l^n - 1 = {q} exceeds the enumeration budget {budget}")
    return np.arange(q, dtype=np.int64), q


def periodic_points(base, n: int, n_max: int = DEFAULT_PERIOD_CAP,
                    budget: int = DEFAULT_POINT_BUDGET) -> PeriodicPoints:
    """All solutions of T^n(p) = p as exact rationals, grouped into orbits."""
    l = _as_base(base).degree
    if not 1 <= n <= n_max:
        raise ValidationError(f"period must lie in 1..{n_max}")
    ks, q = periodic_numerators(l, n, budget)
    seen = np.zeros(q, dtype=bool)
    orbits, periods = [], []
    for k in ks.tolist():
        if seen[k]:
            continue
        orbit = [k]
        seen[k] = True
        j = (l * k) % q
        while j != k:
            orbit.append(j)
            seen[j] = True
            j = (l * j) % q
        orbits.append(tuple(Fraction(m, q) for m in orbit))
        periods.append(len(orbit))
    return PeriodicPoints(
        degree=l,
        period=n,
        points=tuple(Fraction(int(k), q) for k in ks),
        orbits=tuple(orbits),
        minimal_periods=tuple(periods),
    )


def is_periodic(base, p: Fraction, n: int) -> bool:
    y = p
    for _ in range(n):
        y = forward(base, y)
    return y == p


def itinerary_from_digits(degree: int, digits: Sequence[int]) -> Itinerary:
    return Itinerary(degree, tuple(digits), (0,))
