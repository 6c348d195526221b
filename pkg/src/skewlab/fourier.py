"""Finite Fourier series on the circle.

Coefficient convention: c(k) = int_0^1 f(x) exp(-2 pi i k x) dx, so that
f(x) = sum_k c(k) exp(2 pi i k x). Every solver in the package relies on it.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import InsufficientSamples, ValidationError

K_MAX = 128
TWO_PI = 2.0 * math.pi
_EPS = np.finfo(float).eps


class CircleFunction:
    """A trigonometric polynomial sum_{|k| <= K} c(k) e^{2 pi i k x}.

    Values are immutable; arithmetic returns new instances. ``real`` marks
    conjugate-symmetric tables, for which :meth:`evaluate` returns floats.
    """

    __slots__ = ("_c", "real", "aliasing_residual")

    def __init__(self, coeffs, real: bool | None = None, k_max: int = K_MAX,
                 aliasing_residual: float | None = None):
        c = np.array(coeffs, dtype=complex).ravel()
        if c.size % 2 == 0:
            raise ValidationError("coefficient table must have odd length 2K+1")
        c = _trim(c)
        K = (c.size - 1) // 2
        if K > k_max:
            raise ValidationError(f"degree {K} exceeds K_max={k_max}")
        symmetric = np.allclose(c, np.conj(c[::-1]), rtol=0, atol=1e-14 * max(1.0, np.abs(c).max()))
        if real is None:
            real = bool(symmetric)
        elif real and not symmetric:
            raise ValidationError("real function requires c(-k) = conj(c(k))")
        if real:
            c = 0.5 * (c + np.conj(c[::-1]))
        c.setflags(write=False)
        self._c = c
        self.real = bool(real)
        self.aliasing_residual = aliasing_residual

    # -- construction -----------------------------------------------------

    @classmethod
    def from_dict(cls, table: dict, real: bool | None = None, **kw) -> "CircleFunction":
        K = max((abs(int(k)) for k in table), default=0)
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, v in table.items():
            c[int(k) + K] = v
        return cls(c, real=real, **kw)

    @classmethod
    def from_half(cls, half) -> "CircleFunction":
        """Real function from its coefficients c(0), ..., c(K)."""
        half = np.asarray(half, dtype=complex)
        full = np.concatenate([np.conj(half[:0:-1]), half])
        full[half.size - 1] = half[0].real
        return cls(full, real=True)

    @classmethod
    def constant(cls, c: float) -> "CircleFunction":
        return cls([c], real=True)

    @classmethod
    def cos(cls, k: int = 1, amplitude: float = 1.0) -> "CircleFunction":
        return cls.from_dict({k: amplitude / 2, -k: amplitude / 2}, real=True) if k else cls.constant(amplitude)

    @classmethod
    def sin(cls, k: int = 1, amplitude: float = 1.0) -> "CircleFunction":
        if k == 0:
            return cls.constant(0.0)
        return cls.from_dict({k: -0.5j * amplitude, -k: 0.5j * amplitude}, real=True)

    # -- access -----------------------------------------------------------

    @property
    def degree(self) -> int:
        return (self._c.size - 1) // 2

    @property
    def coeffs(self) -> np.ndarray:
        """Read-only table indexed by k + degree."""
        return self._c

    def coeff(self, k: int) -> complex:
        K = self.degree
        return complex(self._c[k + K]) if -K <= k <= K else 0j

    @property
    def mean(self) -> complex:
        return self.coeff(0)

    def half(self) -> np.ndarray:
        """c(0), c(1), ..., c(K) as a fresh complex array."""
        return np.array(self._c[self.degree:], dtype=complex)

    def support(self) -> list[int]:
        K = self.degree
        return [int(i) - K for i in np.flatnonzero(self._c != 0)]

    # -- evaluation -------------------------------------------------------

    def evaluate(self, x):
        """f(x) for a scalar or array; real part only when ``self.real``."""
        x_arr = np.asarray(x, dtype=float)
        if self.real:
            out = _horner_real(self.half(), x_arr)
        else:
            ks = np.arange(-self.degree, self.degree + 1)
            out = np.exp(2j * np.pi * np.multiply.outer(x_arr, ks)) @ self._c
        return out.item() if np.ndim(out) == 0 else out

    __call__ = evaluate

    def evaluate_rational(self, num, den: int):
        """f(num/den) with the phase k*num reduced mod den in integers first."""
        num = np.asarray(num, dtype=np.int64)
        total = np.zeros(num.shape, dtype=complex if not self.real else float)
        for k in self.support():
            if self.real and k < 0:
                continue
            ck = self.coeff(k)
            if k == 0:
                total = total + (ck.real if self.real else ck)
                continue
            phase = TWO_PI * ((k % den) * (num % den) % den) / den
            if self.real:
                total = total + 2.0 * (ck.real * np.cos(phase) - ck.imag * np.sin(phase))
            else:
                total = total + ck * np.exp(1j * phase)
        return total

    def evaluate_fraction(self, p: Fraction):
        return self.evaluate_rational(p.numerator, p.denominator).item()

    # -- algebra ----------------------------------------------------------

    def _binary(self, other, op):
        if not isinstance(other, CircleFunction):
            other = CircleFunction.constant(other) if np.isrealobj(other) else CircleFunction([other], real=False)
        K = max(self.degree, other.degree)
        a, b = _pad(self._c, K), _pad(other._c, K)
        real = self.real and other.real
        return CircleFunction(op(a, b), real=real, k_max=max(K, K_MAX))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, s):
        if isinstance(s, CircleFunction):
            return NotImplemented
        return CircleFunction(self._c * s, real=self.real and np.isrealobj(s), k_max=max(self.degree, K_MAX))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __eq__(self, other):
        if not isinstance(other, CircleFunction):
            return NotImplemented
        return self.real == other.real and np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash((self.real, self._c.tobytes()))

    def __repr__(self):
        terms = ", ".join(f"{k}: {self.coeff(k):.6g}" for k in self.support())
        return f"CircleFunction({{{terms}}}, real={self.real})"

    def derivative(self) -> "CircleFunction":
        K = self.degree
        ks = np.arange(-K, K + 1)
        return CircleFunction(2j * np.pi * ks * self._c, real=self.real, k_max=max(K, K_MAX))

    def antiderivative(self) -> "CircleFunction":
        """Mean-zero periodic primitive of f - mean(f)."""
        K = self.degree
        ks = np.arange(-K, K + 1)
        c = np.zeros_like(self._c)
        nz = ks != 0
        c[nz] = self._c[nz] / (2j * np.pi * ks[nz])
        return CircleFunction(c, real=self.real, k_max=max(K, K_MAX))

    def compose_power(self, l: int) -> "CircleFunction":
        """x -> f(l*x)."""
        K = self.degree
        c = np.zeros(2 * l * K + 1, dtype=complex)
        c[::l] = self._c
        return CircleFunction(c, real=self.real, k_max=max(l * K, K_MAX))

    def without_mean(self) -> "CircleFunction":
        c = np.array(self._c)
        c[self.degree] = 0
        return CircleFunction(c, real=self.real, k_max=max(self.degree, K_MAX))

    # -- norms ------------------------------------------------------------

    def l1_norm(self) -> float:
        return float(np.abs(self._c).sum())

    def decay_exponent(self) -> float | None:
        """Least-squares slope of log|c(k)| against log k over k >= 1.

        Reported instead of a smoothness class; None with fewer than three
        nonzero positive frequencies.
        """
        ks = [k for k in self.support() if k > 0]
        if len(ks) < 3:
            return None
        mags = np.array([abs(self.coeff(k)) for k in ks])
        slope = np.polyfit(np.log(ks), np.log(mags), 1)[0]
        return float(slope)


@dataclass(frozen=True)
class NormEstimate:
    bound: float  # certified: max |f| <= bound
    sampled: float  # max |f| over a dense grid, a lower estimate


def sup_norm(f: CircleFunction, grid: int = 4096) -> NormEstimate:
    """Coefficient l1 bound together with a dense-grid lower estimate."""
    xs = np.arange(grid) / grid
    sampled = float(np.max(np.abs(f.evaluate(xs)))) if f.degree else abs(f.mean)
    return NormEstimate(bound=f.l1_norm(), sampled=sampled)


def roundoff_bound(f: CircleFunction, arg_error: float = 4 * _EPS) -> float:
    """Bound on |fl(f(x)) - f(x)| for the Horner evaluation used here.

    Covers the rounding in the recursion and an absolute error of
    ``arg_error`` in the argument.
    """
    K = f.degree
    if K == 0:
        return 4 * _EPS * abs(f.mean)
    lip = f.derivative().l1_norm()
    return 8 * (K + 2) * _EPS * f.l1_norm() + lip * arg_error


def fit_from_samples(samples, K: int) -> CircleFunction:
    """Degree-K trigonometric interpolant of N equispaced samples at j/N.

    The fitted function carries ``aliasing_residual``, the largest mismatch
    between the interpolant and the samples; energy above the cutoff shows up
    there instead of vanishing.
    """
    s = np.asarray(samples)
    N = s.size
    if N < 2 * K + 1:
        raise InsufficientSamples(f"need N >= 2K+1 = {2 * K + 1}, got {N}")
    spectrum = np.fft.fft(s) / N
    ks = np.arange(-K, K + 1)
    c = spectrum[ks % N]
    real = bool(np.isrealobj(s))
    fitted = CircleFunction(c, real=real, k_max=max(K, K_MAX))
    grid = np.arange(N) / N
    resid = float(np.max(np.abs(fitted.evaluate(grid) - s)))
    return CircleFunction(fitted.coeffs, real=real, k_max=max(K, K_MAX), aliasing_residual=resid)


# ---------------------------------------------------------------------------
# serialization


def to_json_dict(f: CircleFunction, l: int | None = None) -> dict:
    out = {"fourier": [[k, f.coeff(k).real, f.coeff(k).imag] for k in f.support()]}
    if l is not None:
        out = {"l": int(l), **out}
    return out


def from_json_dict(data: dict) -> tuple[CircleFunction, int | None]:
    """Parse {"l": int, "fourier": [[k, re, im], ...]} into a real function.

    Missing negative frequencies are filled by conjugation; entries that
    contradict conjugate symmetry are rejected.
    """
    if "fourier" not in data:
        raise ValidationError("function spec needs a 'fourier' table")
    table: dict[int, complex] = {}
    for row in data["fourier"]:
        if len(row) != 3:
            raise ValidationError(f"fourier rows are [k, re, im], got {row!r}")
        k = int(row[0])
        if k in table:
            raise ValidationError(f"frequency {k} listed twice")
        table[k] = complex(float(row[1]), float(row[2]))
    if 0 in table and abs(table[0].imag) > 1e-14:
        raise ValidationError("c(0) must be real")
    for k, v in list(table.items()):
        if -k in table:
            if abs(table[-k] - np.conj(v)) > 1e-12 * max(1.0, abs(v)):
                raise ValidationError(f"c({-k}) != conj(c({k})): not a real function")
        else:
            table[-k] = np.conj(v)
    l = data.get("l")
    if l is not None and (int(l) != l or l < 2):
        raise ValidationError(f"'l' must be an integer >= 2, got {l!r}")
    return CircleFunction.from_dict(table, real=True), (int(l) if l is not None else None)


def load_function(path) -> tuple[CircleFunction, int | None]:
    with open(Path(path)) as fh:
        return from_json_dict(json.load(fh))


_TERM = re.compile(
    r"\s*([+-])?\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)\s*\*?\s*)?(sin|cos)?(\d+)?\s*"
)


def parse_shorthand(text: str) -> CircleFunction:
    """Parse one-liners such as ``"0.5*sin"``, ``"cos2 - cos1"``, ``"constant:3"``.

    ``sinK``/``cosK`` stand for sin(2 pi K x)/cos(2 pi K x) with K defaulting
    to 1; a bare number is a constant term.
    """
    text = text.strip()
    if text.startswith("constant:"):
        try:
            return CircleFunction.constant(float(text.split(":", 1)[1]))
        except ValueError as exc:
            raise ValidationError(f"bad constant in {text!r}") from exc
    if not text:
        raise ValidationError("empty function expression")
    total = CircleFunction.constant(0.0)
    pos = 0
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if m is None or m.end() == pos:
            raise ValidationError(f"cannot parse {text[pos:]!r} in {text!r}")
        sign, coef, kind, k = m.groups()
        if sign is None and not first:
            raise ValidationError(f"missing operator before {m.group(0).strip()!r}")
        if coef is None and kind is None:
            raise ValidationError(f"dangling term in {text!r}")
        amp = float(coef) if coef is not None else 1.0
        if sign == "-":
            amp = -amp
        if kind is None:
            if k is not None:
                raise ValidationError(f"cannot parse {m.group(0)!r}")
            total = total + amp
        else:
            freq = int(k) if k is not None else 1
            term = CircleFunction.sin(freq, amp) if kind == "sin" else CircleFunction.cos(freq, amp)
            total = total + term
        pos = m.end()
        first = False
    return total


def parse_function(spec: str) -> tuple[CircleFunction, int | None]:
    """Shorthand expression or a path to a JSON function spec."""
    p = Path(spec)
    if spec.endswith(".json") or p.is_file():
        return load_function(p)
    return parse_shorthand(spec), None


# ---------------------------------------------------------------------------
# helpers


def _trim(c: np.ndarray) -> np.ndarray:
    K = (c.size - 1) // 2
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return np.zeros(1, dtype=complex)
    top = int(max(abs(nz[0] - K), abs(nz[-1] - K)))
    return c[K - top:K + top + 1].copy()


def _pad(c: np.ndarray, K: int) -> np.ndarray:
    k0 = (c.size - 1) // 2
    out = np.zeros(2 * K + 1, dtype=complex)
    out[K - k0:K + k0 + 1] = c
    return out


def _horner_real(half: np.ndarray, x: np.ndarray) -> np.ndarray:
    """c0.real + 2 Re sum_{k>=1} c_k w^k with w = exp(2 pi i x)."""
    K = half.size - 1
    if K == 0:
        return np.full(x.shape, half[0].real)
    w = np.exp(2j * np.pi * x)
    acc = np.full(x.shape, half[K], dtype=complex)
    for k in range(K - 1, 0, -1):
        acc = acc * w + half[k]
    acc = acc * w
    return half[0].real + 2.0 * acc.real
