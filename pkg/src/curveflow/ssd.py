"""Solid-state dewetting: substrate parameters, Young force, contact angles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import SurfaceEnergy, discrete_energy, gamma_eval
from .errors import BadSubstrate, NoRoot, ValidationError
from .geometry import CurveState, SegmentFrame, segment_frame

SCAN_POINTS = 2048
ROOT_TOL = 1e-12


@dataclass(frozen=True)
class SubstrateConfig:
    """Flat substrate: material constant ``sigma`` and contact line mobility ``eta``."""

    sigma: float
    eta: float = 100.0

    def __post_init__(self):
        if not np.isfinite(self.sigma):
            raise BadSubstrate("sigma must be finite")
        if not (self.eta > 0 and np.isfinite(self.eta)):
            raise BadSubstrate(f"eta must be positive, got {self.eta}")


def young_force(energy: SurfaceEnergy, theta, sigma: float):
    """``gamma(theta) cos(theta) - gamma'(theta) sin(theta) - sigma``."""
    g, dg, _ = gamma_eval(energy, theta)
    return g * np.cos(theta) - dg * np.sin(theta) - sigma


def equilibrium_angles(energy: SurfaceEnergy, sigma: float) -> list[float]:
    """All roots of the Young force in (0, pi), ascending."""
    # scan strictly inside the interval; exact zeros on the grid count as roots
    grid = np.linspace(0.0, np.pi, SCAN_POINTS + 1)[1:-1]
    f = young_force(energy, grid, sigma)
    roots = []
    for i in range(grid.size - 1):
        if f[i] == 0.0:
            roots.append(float(grid[i]))
        elif f[i] * f[i + 1] < 0:
            lo, hi, flo = grid[i], grid[i + 1], f[i]
            while hi - lo > ROOT_TOL:
                mid = 0.5 * (lo + hi)
                fm = young_force(energy, mid, sigma)
                if fm == 0.0:
                    lo = hi = mid
                    break
                if (fm < 0) == (flo < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            roots.append(float(0.5 * (lo + hi)))
    if f[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def equilibrium_angle(energy: SurfaceEnergy, sigma: float) -> float:
    """Smallest equilibrium contact angle in (0, pi)."""
    roots = equilibrium_angles(energy, sigma)
    if not roots:
        raise NoRoot(f"Young force has no sign change on (0, pi) for sigma={sigma}")
    return roots[0]


def ssd_energy(curve: CurveState, frame: SegmentFrame, energy: SurfaceEnergy, substrate: SubstrateConfig) -> float:
    """Film surface energy minus the substrate term ``(x_r - x_l) sigma``."""
    if curve.closed:
        raise ValidationError("ssd_energy needs an open curve")
    return discrete_energy(curve, frame, energy) - (curve.x[-1] - curve.x[0]) * substrate.sigma


def contact_angles(curve: CurveState) -> tuple[float, float]:
    """Angles at the left and right contact points, measured inside the film."""
    if curve.closed:
        raise ValidationError("contact angles need an open curve")
    t = segment_frame(curve).tangents
    left = np.arctan2(t[0, 1], t[0, 0])
    right = np.arctan2(-t[-1, 1], t[-1, 0])
    return float(left), float(right)
