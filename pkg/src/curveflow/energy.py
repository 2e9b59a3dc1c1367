"""Anisotropic surface energy densities and the stabilized matrix B(theta)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NonpositiveGamma, NotPositiveDefinite, ValidationError
from .geometry import CurveState, SegmentFrame

CHECK_GRID = 4096
PERIODICITY_TOL = 1e-13


@dataclass(frozen=True)
class SurfaceEnergy:
    """Surface energy density gamma(theta).

    ``kind`` is one of ``"isotropic"``, ``"cosine"`` (``1 + beta cos(fold theta)``)
    or ``"tabulated"`` (user callbacks for gamma and its first two derivatives).
    The stability function is ``stability_factor * S0(theta)`` unless
    ``forced_stability`` pins it to a constant.
    """

    kind: str = "isotropic"
    beta: float = 0.0
    fold: int = 4
    stability_factor: float = 2.0
    funcs: Optional[tuple[Callable, Callable, Callable]] = field(default=None, compare=False)
    forced_stability: Optional[float] = None
    pi_periodic: bool = field(init=False, default=True)

    def __post_init__(self):
        if self.kind not in ("isotropic", "cosine", "tabulated"):
            raise ValidationError(f"unknown gamma kind {self.kind!r}")
        if self.kind == "tabulated" and (self.funcs is None or len(self.funcs) != 3):
            raise ValidationError("tabulated gamma needs (gamma, dgamma, ddgamma) callbacks")
        if self.kind == "cosine" and int(self.fold) != self.fold:
            raise ValidationError("gamma.fold must be an integer")
        if not self.stability_factor > 0:
            raise ValidationError("gamma.stability_factor must be positive")
        grid = np.linspace(-np.pi, np.pi, CHECK_GRID, endpoint=False)
        g = self.gamma(grid)
        if not np.all(g > 0):
            k = int(np.argmin(g))
            raise NonpositiveGamma(f"gamma({grid[k]:.6f}) = {g[k]:.3e} <= 0")
        gap = np.max(np.abs(g - self.gamma(grid + np.pi)))
        object.__setattr__(self, "pi_periodic", bool(gap <= PERIODICITY_TOL))

    @classmethod
    def isotropic(cls, **kw) -> "SurfaceEnergy":
        return cls("isotropic", **kw)

    @classmethod
    def cosine(cls, beta: float, fold: int = 4, **kw) -> "SurfaceEnergy":
        if beta == 0:
            return cls("isotropic", **kw)
        return cls("cosine", beta=float(beta), fold=int(fold), **kw)

    @classmethod
    def tabulated(cls, gamma, dgamma, ddgamma, **kw) -> "SurfaceEnergy":
        return cls("tabulated", funcs=(gamma, dgamma, ddgamma), **kw)

    def gamma(self, theta):
        return gamma_eval(self, theta)[0]


def gamma_eval(energy: SurfaceEnergy, theta):
    """Return ``(gamma, gamma', gamma'')`` at ``theta`` (scalar or array)."""
    theta = np.asarray(theta, dtype=float)
    if energy.kind == "isotropic":
        one = np.ones_like(theta)
        return one, np.zeros_like(theta), np.zeros_like(theta)
    if energy.kind == "cosine":
        k, b = energy.fold, energy.beta
        c, s = np.cos(k * theta), np.sin(k * theta)
        return 1.0 + b * c, -k * b * s, -k * k * b * c
    g, dg, ddg = energy.funcs
    return (
        np.asarray(g(theta), dtype=float) + 0 * theta,
        np.asarray(dg(theta), dtype=float) + 0 * theta,
        np.asarray(ddg(theta), dtype=float) + 0 * theta,
    )


def stability_min(energy: SurfaceEnergy, theta):
    """Smallest stability function value keeping B(theta) positive semidefinite.

    B is symmetric with trace S and determinant ``S gamma - (gamma^2 + gamma'^2)``,
    so it is positive definite exactly when ``S > (gamma^2 + gamma'^2) / gamma``.
    """
    g, dg, _ = gamma_eval(energy, theta)
    if np.any(g <= 0):
        raise NonpositiveGamma("gamma must be positive")
    return (g * g + dg * dg) / g


def stability(energy: SurfaceEnergy, theta):
    if energy.forced_stability is not None:
        return np.full(np.shape(theta), float(energy.forced_stability))
    return energy.stability_factor * stability_min(energy, theta)


def b_matrices(energy: SurfaceEnergy, theta, check: bool = True) -> np.ndarray:
    """Stack of B(theta) matrices, shape ``theta.shape + (2, 2)``."""
    theta = np.asarray(theta, dtype=float)
    g, dg, _ = gamma_eval(energy, theta)
    S = stability(energy, theta)
    c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
    B = np.empty(theta.shape + (2, 2))
    # [[g, -g'], [g', g]] @ [[c2, s2], [s2, -c2]] + S (I - [[c2, s2], [s2, -c2]]) / 2
    B[..., 0, 0] = g * c2 - dg * s2 + 0.5 * S * (1 - c2)
    B[..., 0, 1] = g * s2 + dg * c2 - 0.5 * S * s2
    B[..., 1, 0] = B[..., 0, 1]
    B[..., 1, 1] = dg * s2 - g * c2 + 0.5 * S * (1 + c2)
    if check:
        lam = min_eigenvalue(B)
        if np.any(lam <= 0):
            k = np.unravel_index(np.argmin(lam), lam.shape)
            raise NotPositiveDefinite(
                f"B(theta) not positive definite at theta={float(theta[k]):.6f} "
                f"(min eigenvalue {float(lam[k]):.3e})"
            )
    return B


def b_matrix(energy: SurfaceEnergy, theta: float) -> np.ndarray:
    return b_matrices(energy, np.float64(theta))


def min_eigenvalue(B: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of symmetric 2x2 matrices, closed form."""
    a, b, d = B[..., 0, 0], B[..., 0, 1], B[..., 1, 1]
    return 0.5 * (a + d) - np.hypot(0.5 * (a - d), b)


@dataclass(frozen=True)
class PDReport:
    passed: bool
    min_eigenvalue: float
    argmin_theta: float
    grid_size: int


def pd_check(energy: SurfaceEnergy, grid_size: int = CHECK_GRID) -> PDReport:
    if grid_size < 64:
        raise ValidationError("pd_check needs grid_size >= 64")
    theta = np.linspace(-np.pi, np.pi, grid_size, endpoint=False)
    lam = min_eigenvalue(b_matrices(energy, theta, check=False))
    k = int(np.argmin(lam))
    return PDReport(bool(lam[k] > 0), float(lam[k]), float(theta[k]), grid_size)


def discrete_energy(curve: CurveState, frame: SegmentFrame, energy: SurfaceEnergy) -> float:
    """Weighted length ``sum |h_j| gamma(theta_j)``."""
    if energy.kind == "isotropic":
        return float(frame.lengths.sum())
    return float(np.sum(frame.lengths * energy.gamma(frame.angles)))
