"""Birkhoff averages, correlation decay and invariant-function witnesses.

Observables are finite sums Re sum c e^{2 pi i (j x + k y)}, optionally read
in sheared coordinates (x, y - u(x)); the shear is how the conjugated
witness of a coboundary system is expressed without leaving the kernels.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import NonRational, RateUnavailable, ValidationError
from .fourier import CircleFunction
from .system import SkewSystem

START_SHARD = 8
SAMPLE_SHARD = 1 << 16
DEFAULT_SAMPLES = 1_000_000


@dataclass(frozen=True)
class Observable:
    terms: tuple  # (j, k, complex c)
    shift: CircleFunction | None = None
    label: str = ""

    @classmethod
    def cos(cls, j: int, k: int, amplitude: float = 1.0) -> "Observable":
        return cls(((j, k, complex(amplitude)),), label=_label("cos", j, k, amplitude))

    @classmethod
    def sin(cls, j: int, k: int, amplitude: float = 1.0) -> "Observable":
        return cls(((j, k, complex(0, -amplitude)),), label=_label("sin", j, k, amplitude))

    @classmethod
    def constant(cls, c: float) -> "Observable":
        return cls(((0, 0, complex(c)),), label=f"{c:g}")

    @classmethod
    def product(cls, fx: CircleFunction, fy: CircleFunction, label: str = "") -> "Observable":
        """psi(x, y) = fx(x) * fy(y)."""
        terms = tuple((j, k, fx.coeff(j) * fy.coeff(k)) for j in fx.support() for k in fy.support())
        return cls(terms or ((0, 0, 0j),), label=label or "product")

    @property
    def space_average(self) -> float:
        """Exact Lebesgue average; the shear preserves it."""
        return float(sum(c.real for j, k, c in self.terms if j == 0 and k == 0))

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.shift is not None:
            y = y - self.shift.evaluate(x)
        out = np.zeros(np.broadcast(x, y).shape)
        for j, k, c in self.terms:
            ang = 2 * np.pi * (j * x + k * y)
            out = out + c.real * np.cos(ang) - c.imag * np.sin(ang)
        return out


def _label(kind: str, j: int, k: int, amplitude: float) -> str:
    head = "" if amplitude == 1.0 else f"{amplitude!r}*"
    return f"{head}{kind}({j},{k})"


def standard_observables() -> list[Observable]:
    return [
        Observable.cos(1, 0),
        Observable.sin(0, 1),
        Observable.cos(1, 1),
        Observable.sin(2, -1),
        Observable.cos(1, -2),
    ]


def pack_observables(observables) -> tuple:
    tj, tk, tre, tim, tobs = [], [], [], [], []
    width = 1
    for o, obs in enumerate(observables):
        for j, k, c in obs.terms:
            tj.append(j)
            tk.append(k)
            tre.append(c.real)
            tim.append(c.imag)
            tobs.append(o)
        if obs.shift is not None:
            width = max(width, obs.shift.degree + 1)
    shifts = np.zeros((len(observables), width), dtype=complex)
    has = np.zeros(len(observables), dtype=np.bool_)
    for o, obs in enumerate(observables):
        if obs.shift is not None:
            h = obs.shift.half()
            shifts[o, :h.size] = h
            has[o] = True
    return (np.array(tj, dtype=np.int64), np.array(tk, dtype=np.int64), np.array(tre, dtype=float),
            np.array(tim, dtype=float), np.array(tobs, dtype=np.int64), shifts, has)


# ---------------------------------------------------------------------------
# starts and sampling


def sample_points(seed: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform torus points: lattice residues for x, floats for y."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return rng.integers(0, kernels.LATTICE_MODULUS, size=count, dtype=np.int64), rng.random(count)


def _sample_shards(seed: int, total: int) -> list[tuple[int, np.random.SeedSequence]]:
    sizes = [SAMPLE_SHARD] * (total // SAMPLE_SHARD)
    if total % SAMPLE_SHARD:
        sizes.append(total % SAMPLE_SHARD)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    return list(zip(sizes, children))


def _draw(size: int, ss: np.random.SeedSequence):
    rng = np.random.default_rng(ss)
    return rng.integers(0, kernels.LATTICE_MODULUS, size=size, dtype=np.int64), rng.random(size)


def _time_averages(system: SkewSystem, observables, x0, y0, n: int, threads=None) -> np.ndarray:
    packed = pack_observables(observables)
    args = system.kernel_args()
    k = kernels.get()
    shards = [slice(i, min(i + START_SHARD, len(x0))) for i in range(0, len(x0), START_SHARD)]

    def run(sl):
        return k.time_averages(x0[sl], y0[sl], int(n), *args, *packed, len(observables))

    parts = kernels.run_sharded(run, shards, threads)
    return np.vstack(parts) if parts else np.zeros((0, len(observables)))


def birkhoff_average(system: SkewSystem, obs: Observable, z0, n: int) -> float:
    """(1/n) sum_{i<n} obs(f^i z0)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    x0 = kernels.quantize([z0[0]])
    y0 = np.array([float(z0[1]) % 1.0])
    return float(_time_averages(system, [obs], x0, y0, n, threads=1)[0, 0])


@dataclass
class ErgodicityReport:
    observables: list
    starts: np.ndarray  # (M, 2) floats
    time_averages: np.ndarray  # (M, n_obs)
    space_averages: np.ndarray
    deviation: float
    deviation_per_observable: np.ndarray
    dispersion: float
    dispersion_per_observable: np.ndarray
    n: int
    seed: int

    def summary(self) -> dict:
        return {
            "deviation": self.deviation,
            "dispersion": self.dispersion,
            "per_observable": [
                {"observable": o.label, "space_average": float(s), "deviation": float(d), "dispersion": float(p)}
                for o, s, d, p in zip(self.observables, self.space_averages,
                                      self.deviation_per_observable, self.dispersion_per_observable)
            ],
            "M": int(self.starts.shape[0]),
            "n": self.n,
            "seed": self.seed,
        }

    def rows(self):
        for o, obs in enumerate(self.observables):
            for m in range(self.starts.shape[0]):
                yield (obs.label, m, self.starts[m, 0], self.starts[m, 1],
                       self.time_averages[m, o], self.space_averages[o])


def ergodicity_score(system: SkewSystem, observables=None, M: int = 200, n: int = 100_000,
                     seed: int = 0, threads: int | None = None) -> ErgodicityReport:
    """Time averages from M seeded starts against exact space averages."""
    if M < 2:
        raise ValidationError("need at least two starts")
    observables = list(observables) if observables is not None else standard_observables()
    x0, y0 = sample_points(seed, M)
    ta = _time_averages(system, observables, x0, y0, n, threads)
    sa = np.array([o.space_average for o in observables])
    dev = np.max(np.abs(ta - sa), axis=0)
    disp = np.std(ta, axis=0)
    return ErgodicityReport(
        observables=observables,
        starts=np.column_stack([kernels.to_float(x0), y0]),
        time_averages=ta,
        space_averages=sa,
        deviation=float(dev.max()),
        deviation_per_observable=dev,
        dispersion=float(disp.max()),
        dispersion_per_observable=disp,
        n=int(n),
        seed=int(seed),
    )


# ---------------------------------------------------------------------------
# correlations


@dataclass
class MixingResult:
    C: np.ndarray  # C_1..C_{n_max}
    stderr: np.ndarray
    rate: float | None  # slope of log|C_n| against n
    usable: np.ndarray  # lags (1-based) entering the fit
    samples: int
    seed: int

    def summary(self) -> dict:
        return {"rate": self.rate, "usable_lags": self.usable.tolist(), "samples": self.samples,
                "seed": self.seed, "n_max": int(self.C.size)}


def fit_decay_rate(C, stderr) -> tuple[float, np.ndarray]:
    """Slope of a least-squares line through log|C_n| where |C_n| > 3 stderr."""
    C = np.asarray(C)
    lags = np.arange(1, C.size + 1)
    ok = np.abs(C) > 3 * np.asarray(stderr)
    if ok.sum() < 3:
        raise RateUnavailable(f"only {int(ok.sum())} lags resolved above 3 standard errors")
    slope = np.polyfit(lags[ok], np.log(np.abs(C[ok])), 1)[0]
    return float(slope), lags[ok]


def correlation_sequence(system: SkewSystem, psi: Observable, chi: Observable, n_max: int,
                         samples: int = DEFAULT_SAMPLES, seed: int = 0,
                         threads: int | None = None) -> MixingResult:
    """C_n = <psi * chi o f^n> - <psi><chi> by Monte Carlo, n = 1..n_max.

    The means <psi> and <chi o f^n> are taken over the same sample as the
    product, so a constant psi or chi gives C_n = 0 up to rounding.
    """
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    pa, pb = pack_observables([psi]), pack_observables([chi])
    args = system.kernel_args()
    k = kernels.get()

    def run(shard):
        size, ss = shard
        x0, y0 = _draw(size, ss)
        return k.correlation_sums(x0, y0, int(n_max), *args, *pa, *pb)

    parts = kernels.run_sharded(run, _sample_shards(seed, samples), threads)
    sums = np.sum([p[0] for p in parts], axis=0)
    sumsq = np.sum([p[1] for p in parts], axis=0)
    mean_a = sum(p[2] for p in parts) / samples
    mean_b = np.sum([p[3] for p in parts], axis=0) / samples
    mean = sums / samples
    var = np.maximum(sumsq / samples - mean**2, 0.0)
    C = mean - mean_a * mean_b
    se = np.sqrt(var / samples)
    try:
        rate, usable = fit_decay_rate(C[1:], se[1:])
    except RateUnavailable:
        rate, usable = None, np.zeros(0, dtype=int)
    return MixingResult(C=C[1:], stderr=se[1:], rate=rate, usable=usable, samples=samples, seed=seed)


# ---------------------------------------------------------------------------
# invariant witness


def as_rational(b, max_denominator: int = 10**6) -> Fraction:
    if isinstance(b, Fraction):
        return b
    if isinstance(b, int):
        return Fraction(b)
    if isinstance(b, str):
        try:
            return Fraction(b)
        except ValueError as exc:
            raise NonRational(f"cannot read {b!r} as a rational") from exc
    if isinstance(b, float) and math.isfinite(b):
        frac = Fraction(b).limit_denominator(max_denominator)
        if float(frac) == b:
            return frac
    raise NonRational(f"{b!r} is not a rational with denominator <= {max_denominator}")


@dataclass(frozen=True)
class WitnessValue:
    value: float
    image_value: float
    invariance_error: float
    c: int
    d: int


def invariant_witness_value(l: int, a: int, b, point) -> WitnessValue:
    """psi(x, y) = (c x - d y) mod 1 with c = a n, d = (l-1) n for b = m/n.

    psi is invariant under f_tau(x, y) = (l x, y + a x + b); the returned
    invariance error is the circle distance between psi(f_tau(z)) and psi(z).
    """
    b = as_rational(b)
    n = b.denominator
    c, d = int(a) * n, (l - 1) * n
    # floats are read at their exact binary value so large c, d lose nothing
    x, y = (Fraction(v) for v in point)
    v = (c * x - d * y) % 1
    fx, fy = (l * x) % 1, (y + a * x + b) % 1
    w = (c * fx - d * fy) % 1
    gap = (w - v) % 1
    return WitnessValue(float(v), float(w), float(min(gap, 1 - gap)), c, d)


# continued fractions put any float within ~1/q^2 of some m/q, so a recovered
# constant only counts as rational when its denominator is small
WITNESS_MAX_DENOMINATOR = 1000


def conjugated_witness_observable(l: int, u: CircleFunction, C,
                                  max_denominator: int = WITNESS_MAX_DENOMINATOR) -> Observable:
    """sin(2 pi (l-1) n (y - u(x))) for phi = u o T - u + m/n.

    The shear (x, y) -> (x, y - u(x)) conjugates f_phi to f_C, where
    -(l-1) n y mod 1 is invariant, so this observable is f_phi-invariant.
    """
    b = as_rational(C, max_denominator) if not isinstance(C, float) else _near_rational(C, max_denominator)
    k = (l - 1) * b.denominator
    return Observable(((0, k, complex(0, -1)),), shift=u, label=f"witness_sin2pi({k}(y-u(x)))")


def _near_rational(C: float, max_denominator: int) -> Fraction:
    frac = Fraction(C).limit_denominator(max_denominator)
    if abs(float(frac) - C) > 1e-12:
        raise NonRational(f"constant {C!r} is not within 1e-12 of a rational with denominator <= {max_denominator}")
    return frac


_OBS = re.compile(r"^\s*(?:([-+]?\d*\.?\d+(?:[eE][-+]?\d+)?)\s*\*\s*)?(cos|sin)\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*$")


def parse_observable(text: str) -> Observable:
    """``"cos(1,1)"`` is cos 2 pi (x + y), ``"0.5*sin(2,-1)"``, ``"constant:c"``."""
    text = text.strip()
    if text.startswith("constant:"):
        try:
            return Observable.constant(float(text.split(":", 1)[1]))
        except ValueError as exc:
            raise ValidationError(f"bad constant in {text!r}") from exc
    m = _OBS.match(text)
    if m is None:
        raise ValidationError(f"cannot parse observable {text!r}")
    amp = float(m.group(1)) if m.group(1) else 1.0
    maker = Observable.cos if m.group(2) == "cos" else Observable.sin
    obs = maker(int(m.group(3)), int(m.group(4)), amp)
    return obs
