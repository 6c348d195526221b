"""The skew product f(x, y) = (l x, y + phi(x)) and its two-shear perturbations.

A perturbed system is g = S2 o S1 o f with S1(x, y) = (x, y + eps q(x)) and
S2(x, y) = (x + eps r(y), y). Both shears have unit Jacobian, so g has
Jacobian l everywhere and preserves Lebesgue measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConeViolation, JacobianError, ValidationError
from .fourier import CircleFunction, sup_norm

CONE_GRID = 64
JACOBIAN_TOL = 1e-9


@dataclass(frozen=True)
class Perturbation:
    q: CircleFunction
    r: CircleFunction
    eps: float


@dataclass(frozen=True)
class SkewSystem:
    l: int
    phi: CircleFunction
    perturbation: Perturbation | None = None
    cone_margin: float | None = None
    min_expansion: float | None = None

    @property
    def eps(self) -> float:
        return self.perturbation.eps if self.perturbation else 0.0

    def kernel_args(self) -> tuple:
        zero = np.zeros(1, dtype=complex)
        if self.perturbation and self.perturbation.eps != 0.0:
            q, r = self.perturbation.q.half(), self.perturbation.r.half()
        else:
            q, r = zero, zero
        return (np.int64(self.l), np.int64(kernels.LATTICE_MODULUS), self.phi.half(),
                float(self.eps), q, r)

    def apply(self, x, y):
        """One step in plain floating point, vectorized; coordinates mod 1."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        y1 = y + self.phi.evaluate(x)
        x1 = self.l * x
        if self.eps:
            p = self.perturbation
            y1 = y1 + p.eps * p.q.evaluate(x1 % 1.0)
            x1 = x1 + p.eps * p.r.evaluate(y1 % 1.0)
        return x1 % 1.0, y1 % 1.0

    def jacobian(self, x, y) -> np.ndarray:
        """Dg at (x, y), shape (..., 2, 2)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        dphi = self.phi.derivative().evaluate(x)
        J = np.zeros(x.shape + (2, 2))
        J[..., 0, 0] = self.l
        J[..., 1, 0] = dphi
        J[..., 1, 1] = 1.0
        if self.eps:
            p = self.perturbation
            x1 = (self.l * x) % 1.0
            y2 = (y + self.phi.evaluate(x) + p.eps * p.q.evaluate(x1)) % 1.0
            S1 = np.zeros_like(J)
            S1[..., 0, 0] = S1[..., 1, 1] = 1.0
            S1[..., 1, 0] = p.eps * p.q.derivative().evaluate(x1)
            S2 = np.zeros_like(J)
            S2[..., 0, 0] = S2[..., 1, 1] = 1.0
            S2[..., 0, 1] = p.eps * p.r.derivative().evaluate(y2)
            J = S2 @ S1 @ J
        return J


def cone_width(phi: CircleFunction, l: int) -> float:
    """K = sup|phi'| / (l - 1) + 1 for the horizontal cone |slope| <= K."""
    return sup_norm(phi.derivative()).bound / (l - 1) + 1.0


def check_jacobian(system: SkewSystem, grid: int = CONE_GRID) -> float:
    g = (np.arange(grid) + 0.5) / grid
    X, Y = np.meshgrid(g, g, indexing="ij")
    dets = np.linalg.det(system.jacobian(X, Y))
    err = float(np.max(np.abs(dets - system.l)))
    if err > JACOBIAN_TOL:
        raise JacobianError(f"Jacobian deviates from l={system.l} by {err:.3g}")
    return err


def check_cone(system: SkewSystem, grid: int = CONE_GRID, slopes: int = 9) -> tuple[float, float]:
    """Verify Dg maps the horizontal cone strictly inside itself with x-expansion > (l+1)/2.

    Returns (cone margin, minimal horizontal expansion); raises ConeViolation.
    """
    K = cone_width(system.phi, system.l)
    g = (np.arange(grid) + 0.5) / grid
    X, Y = np.meshgrid(g, g, indexing="ij")
    J = system.jacobian(X, Y)[..., None, :, :]
    s = np.linspace(-K, K, slopes)
    wx = J[..., 0, 0] + J[..., 0, 1] * s
    wy = J[..., 1, 0] + J[..., 1, 1] * s
    expansion = float(np.min(wx))
    need = (system.l + 1) / 2
    if expansion <= need:
        raise ConeViolation(f"horizontal expansion {expansion:.3g} <= (l+1)/2 = {need}")
    margin = float(np.min(K - np.abs(wy / wx)))
    if margin <= 0:
        raise ConeViolation(f"cone of width {K:.3g} not mapped inside itself (margin {margin:.3g})")
    return margin, expansion


def build_system(l: int, phi: CircleFunction, perturbation: dict | Perturbation | None = None) -> SkewSystem:
    """Construct f_phi or its two-shear perturbation after the Jacobian and cone checks."""
    if int(l) != l or l < 2:
        raise ValidationError(f"degree must be an integer >= 2, got {l!r}")
    l = int(l)
    if l > kernels.MAX_LATTICE_DEGREE:
        raise ValidationError(f"simulation supports l <= {kernels.MAX_LATTICE_DEGREE}")
    if not phi.real:
        raise ValidationError("phi must be real")
    pert = None
    if perturbation is not None:
        if isinstance(perturbation, dict):
            perturbation = Perturbation(perturbation["q"], perturbation["r"], float(perturbation["eps"]))
        if perturbation.eps < 0:
            raise ValidationError("eps must be >= 0")
        if perturbation.eps > 0:
            pert = perturbation
    system = SkewSystem(l, phi, pert)
    check_jacobian(system)
    margin, expansion = check_cone(system)
    return SkewSystem(l, phi, pert, cone_margin=margin, min_expansion=expansion)


def iterate(system: SkewSystem, z, n: int, stride: int = 1) -> np.ndarray:
    """Points f^stride(z), f^{2 stride}(z), ..., up to f^n(z), as an (m, 2) float array."""
    if n < 1 or stride < 1:
        raise ValidationError("n and stride must be >= 1")
    xi = kernels.quantize(z[0]).item()
    xs, ys = kernels.get().trajectory(np.int64(xi), float(z[1]) % 1.0, int(n), int(stride),
                                      *system.kernel_args())
    return np.column_stack([kernels.to_float(xs[1:]), ys[1:]])
