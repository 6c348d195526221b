"""Is phi = u o T - u + C? Fourier chain sums against a periodic-orbit oracle.

Writing the cohomological equation frequency by frequency splits the nonzero
integers into chains m0, l*m0, l^2*m0, ... with l not dividing m0. Along a
chain the equation is a two-term recursion, so for a trigonometric
polynomial each chain either closes up (sum of the coefficients along it is
zero) or it does not, and that decides the question exactly.

The Livsic test never looks at Fourier chains: it averages phi over every
periodic orbit of T up to a given period, with points held as exact
rationals, and compares against the mean of phi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .circle_maps import DEFAULT_POINT_BUDGET, periodic_numerators
from .errors import BadRoot, InconsistentEvidence, NonDerivativeInput, ValidationError
from .fourier import CircleFunction

TOL_OBSTRUCTION = 1e-9
TOL_RESIDUAL = 1e-9
RESIDUAL_GRID = 4096
LIVSIC_PERIODS = 8


def _check_degree(l: int) -> int:
    if int(l) != l or l < 2:
        raise ValidationError(f"degree must be an integer >= 2, got {l!r}")
    return int(l)


def chain_roots(phi: CircleFunction, l: int) -> list[int]:
    """Positive roots m0 (l does not divide m0) whose chain meets supp(phi)."""
    roots = set()
    for k in phi.support():
        if k <= 0:
            continue
        while k % l == 0:
            k //= l
        roots.add(k)
    return sorted(roots)


def _chain(phi: CircleFunction, l: int, m0: int) -> list[int]:
    out, m = [], m0
    while abs(m) <= phi.degree:
        out.append(m)
        m *= l
    return out


def _support_chain(phi: CircleFunction, l: int, m0: int) -> list[int]:
    """Chain cut after its last frequency where phi is nonzero."""
    chain = _chain(phi, l, m0)
    while chain and phi.coeff(chain[-1]) == 0:
        chain.pop()
    return chain


def chain_sum(phi: CircleFunction, l: int, m0: int) -> complex:
    """S(m0) = sum_{i>=0} c(l^i m0)."""
    l = _check_degree(l)
    if m0 == 0 or m0 % l == 0:
        raise BadRoot(f"chain root must be nonzero and not divisible by {l}, got {m0}")
    return complex(sum(phi.coeff(m) for m in _chain(phi, l, m0)))


def twisted_chain_sum(psi: CircleFunction, l: int, m0: int) -> complex:
    """W(m0) = sum_{i>=0} l^{-i} c(l^i m0); zero iff the chain of the twisted equation closes."""
    l = _check_degree(l)
    if m0 == 0 or m0 % l == 0:
        raise BadRoot(f"chain root must be nonzero and not divisible by {l}, got {m0}")
    return complex(sum(psi.coeff(m) / l**i for i, m in enumerate(_chain(psi, l, m0))))


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Special:
    u: CircleFunction
    C: float
    residual: float

    branch = "Special"

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "C": self.C,
            "residual": self.residual,
            "u": [[k, self.u.coeff(k).real, self.u.coeff(k).imag] for k in self.u.support()],
        }


@dataclass(frozen=True)
class Obstructed:
    witness_chains: tuple  # (root m0, |S(m0)|), largest first
    livsic_deviation: float | None = None

    branch = "Obstructed"

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "witness_chains": [[m, s] for m, s in self.witness_chains],
            "livsic_deviation": self.livsic_deviation,
        }


def coboundary_residual(phi: CircleFunction, u: CircleFunction, C: float, l: int,
                        grid: int = RESIDUAL_GRID) -> float:
    xs = np.arange(grid) / grid
    r = u.compose_power(l).evaluate(xs) - u.evaluate(xs) + C - phi.evaluate(xs)
    return float(np.max(np.abs(r)))


def solve_coboundary(phi: CircleFunction, l: int, tol: float = TOL_OBSTRUCTION):
    """Solve phi = u o T - u + C with mean-zero u, or report the open chains."""
    l = _check_degree(l)
    if not phi.real:
        raise ValidationError("coboundary solver needs a real function")
    C = phi.mean.real
    u_coeffs: dict[int, complex] = {}
    violations = []
    for m0 in chain_roots(phi, l):
        running = 0j
        for m in _chain(phi, l, m0):
            running -= phi.coeff(m)
            u_coeffs[m] = running
        S = -running
        if abs(S) > tol:
            violations.append((m0, abs(S)))
    if violations:
        violations.sort(key=lambda t: (-t[1], t[0]))
        return Obstructed(witness_chains=tuple(violations))
    # the last value on each chain is -S(m0), which is rounding noise here
    table = {}
    for m0 in chain_roots(phi, l):
        chain = _support_chain(phi, l, m0)
        for m in chain[:-1]:
            table[m] = u_coeffs[m]
            table[-m] = np.conj(u_coeffs[m])
    u = CircleFunction.from_dict(table, real=True) if table else CircleFunction.constant(0.0)
    return Special(u=u, C=C, residual=coboundary_residual(phi, u, C, l))


@dataclass(frozen=True)
class TwistedSolution:
    solvable: bool
    theta: CircleFunction | None
    chains: tuple  # (root, |W(root)|) for every root, in root order
    mean: float
    residual: float | None
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "solvable": self.solvable,
            "chains": [[m, w] for m, w in self.chains],
            "mean": self.mean,
            "residual": self.residual,
            "tolerance": self.tolerance,
        }


def twisted_tolerance(psi: CircleFunction, l: int, tol: float = TOL_OBSTRUCTION) -> float:
    """Chain tolerance for derivative-scale inputs: tol * max(1, 2 pi max root)."""
    roots = chain_roots(psi, l)
    return tol * max(1.0, 2 * math.pi * max(roots, default=0))


def solve_twisted(psi: CircleFunction, l: int, tol: float | None = None) -> TwistedSolution:
    """Solve psi = l * theta o T - theta (constant normalized to zero).

    Intended for psi = phi'. A nonzero mean is absorbed into theta's mean and
    flagged with a :class:`NonDerivativeInput` warning.
    """
    l = _check_degree(l)
    if not psi.real:
        raise ValidationError("twisted solver needs a real function")
    if tol is None:
        tol = twisted_tolerance(psi, l)
    mean = psi.mean.real
    if abs(mean) > tol:
        warnings.warn(f"input mean {mean:.3g} is nonzero; not a derivative", NonDerivativeInput, stacklevel=2)
    chains = []
    table: dict[int, complex] = {}
    ok = True
    for m0 in chain_roots(psi, l):
        W = twisted_chain_sum(psi, l, m0)
        chains.append((m0, abs(W)))
        if abs(W) > tol:
            ok = False
            continue
        theta = 0j
        chain = _support_chain(psi, l, m0)
        for m in chain[:-1]:
            theta = l * theta - psi.coeff(m)
            table[m] = theta
            table[-m] = np.conj(theta)
    if not ok:
        return TwistedSolution(False, None, tuple(chains), mean, None, tol)
    table[0] = mean / (l - 1)
    theta = CircleFunction.from_dict(table, real=True)
    xs = np.arange(RESIDUAL_GRID) / RESIDUAL_GRID
    r = l * theta.compose_power(l).evaluate(xs) - theta.evaluate(xs) - psi.evaluate(xs)
    return TwistedSolution(True, theta, tuple(chains), mean, float(np.max(np.abs(r))), tol)


# ---------------------------------------------------------------------------
# periodic-orbit oracle


@dataclass(frozen=True)
class LivsicResult:
    max_deviation: float
    witness_orbit: tuple  # exact rational points of the worst orbit
    signed_deviation: float
    periods_checked: int

    def to_dict(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "signed_deviation": self.signed_deviation,
            "witness_orbit": [str(p) for p in self.witness_orbit],
            "periods_checked": self.periods_checked,
        }


def _orbit_of(k: int, q: int, l: int) -> tuple:
    orbit = [k]
    j = (l * k) % q
    while j != k:
        orbit.append(j)
        j = (l * j) % q
    return tuple(Fraction(m, q) for m in orbit)


def livsic_obstruction(phi: CircleFunction, l: int, n_max: int = LIVSIC_PERIODS,
                       budget: int = DEFAULT_POINT_BUDGET) -> LivsicResult:
    """max over periodic orbits of period <= n_max of |orbit mean of phi - mean(phi)|.

    Points are k/(l^n - 1); phases are reduced in integer arithmetic before
    the trigonometric evaluation, so only the final float evaluation rounds.
    """
    l = _check_degree(l)
    C = phi.mean.real
    best = (-1.0, 0.0, 0, 1)
    for n in range(1, n_max + 1):
        ks, q = periodic_numerators(l, n, budget)
        vals = phi.evaluate_rational(ks, q)
        acc = np.zeros(q)
        idx = ks.copy()
        for _ in range(n):
            acc += vals[idx]
            idx = (idx * l) % q
        dev = acc / n - C
        i = int(np.argmax(np.abs(dev)))
        if abs(dev[i]) > best[0]:
            best = (float(abs(dev[i])), float(dev[i]), int(ks[i]), q)
    dev_abs, dev_signed, k, q = best
    return LivsicResult(dev_abs, _orbit_of(k, q, l), dev_signed, n_max)


# ---------------------------------------------------------------------------
# the dichotomy


@dataclass(frozen=True)
class DichotomyReport:
    branch: str  # "Special" or "StablyErgodic"
    degree: int
    coboundary: object
    twisted: TwistedSolution
    livsic: LivsicResult
    tolerances: dict
    numerical: bool = False
    aliasing_residual: float | None = None
    decay_exponent: float | None = None
    agreement: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "l": self.degree,
            "label": "numerical" if self.numerical else "exact",
            "aliasing_residual": self.aliasing_residual,
            "decay_exponent": self.decay_exponent,
            "coboundary": self.coboundary.to_dict(),
            "twisted": self.twisted.to_dict(),
            "livsic": self.livsic.to_dict(),
            "agreement": self.agreement,
            "tolerances": self.tolerances,
        }


def classify(phi: CircleFunction, l: int, tol_obstruction: float = TOL_OBSTRUCTION,
             tol_residual: float = TOL_RESIDUAL, n_max: int = LIVSIC_PERIODS,
             budget: int = DEFAULT_POINT_BUDGET) -> DichotomyReport:
    """Run all three criteria and return the dichotomy verdict.

    Raises :class:`InconsistentEvidence` (carrying the report) when the
    criteria disagree; that is a bug or tolerance failure, never resolved
    silently.
    """
    l = _check_degree(l)
    verdict = solve_coboundary(phi, l, tol_obstruction)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonDerivativeInput)
        twisted = solve_twisted(phi.derivative(), l, twisted_tolerance(phi.derivative(), l, tol_obstruction))
    livsic = livsic_obstruction(phi, l, n_max, budget)
    if isinstance(verdict, Obstructed):
        verdict = replace(verdict, livsic_deviation=livsic.max_deviation)
    agreement = {
        "chains_closed": isinstance(verdict, Special),
        "twisted_solvable": twisted.solvable,
        "livsic_vanishes": livsic.max_deviation <= tol_obstruction,
    }
    special = agreement["chains_closed"]
    consistent = len(set(agreement.values())) == 1
    if special and verdict.residual >= tol_residual:
        consistent = False
        agreement["residual_ok"] = False
    report = DichotomyReport(
        branch="Special" if special else "StablyErgodic",
        degree=l,
        coboundary=verdict,
        twisted=twisted,
        livsic=livsic,
        tolerances={"obstruction": tol_obstruction, "residual": tol_residual,
                    "twisted": twisted.tolerance, "livsic_periods": n_max},
        numerical=phi.aliasing_residual is not None,
        aliasing_residual=phi.aliasing_residual,
        decay_exponent=phi.decay_exponent(),
        agreement=agreement,
    )
    if not consistent:
        raise InconsistentEvidence(f"criteria disagree: {agreement}", report)
    return report
