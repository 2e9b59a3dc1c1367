"""Saddle-point systems for one implicit step of the parametric scheme.

Unknowns are ordered ``[x_0..x_{n-1}, y_0..y_{n-1}, mu_0..mu_{n-1}]``.  Rows
``0..n-1`` hold the transport equation tested with nodal hats, rows ``n..2n-1``
and ``2n..3n-1`` the x and y components of the curvature equation.  All
integrals are mass lumped on the integration curve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import kernels
from .energy import SurfaceEnergy, b_matrices
from .errors import (
    BadSubstrate,
    DimensionMismatch,
    FixedPointDiverged,
    ResidualTooLarge,
    SingularMatrix,
    ValidationError,
)
from .geometry import CurveState, SegmentFrame, perp, segment_frame, segment_vectors
from .ssd import SubstrateConfig

RESIDUAL_TOL = 1e-11
PIN_TOL = 1e-12


@dataclass(frozen=True)
class Stencil:
    """Backward difference ``(alpha X - known) / dt`` for the new positions."""

    alpha: float
    known: np.ndarray

    @classmethod
    def bdf1(cls, curve: CurveState) -> "Stencil":
        return cls(1.0, curve.nodes)

    @classmethod
    def bdf2(cls, curve: CurveState, prev: CurveState) -> "Stencil":
        if prev.n_nodes != curve.n_nodes:
            raise DimensionMismatch("BDF2 levels must share the node count")
        return cls(1.5, 2.0 * curve.nodes - 0.5 * prev.nodes)


@dataclass
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    n_nodes: int
    closed: bool

    @property
    def dimension(self) -> int:
        return self.rhs.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass
class SolveResult:
    curve: CurveState
    mu: np.ndarray
    residual: float
    iterations: int = 1


def _finalize(rows, cols, vals, rhs, n_nodes, closed) -> LinearSystem:
    dim = rhs.shape[0]
    A = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    A.sum_duplicates()
    return LinearSystem(A, rhs, n_nodes, closed)


def _triplets(frame: SegmentFrame, stencil: Stencil, energy: SurfaceEnergy, dt: float, normals):
    if not dt > 0:
        raise ValidationError(f"time step must be positive, got {dt}")
    n = frame.n_nodes
    if stencil.known.shape != (n, 2):
        raise DimensionMismatch(f"stencil has shape {stencil.known.shape}, expected {(n, 2)}")
    if normals is None:
        normals = frame.normals
    mnorm = np.ascontiguousarray(frame.lengths[:, None] * normals)
    B = np.ascontiguousarray(b_matrices(energy, frame.angles))
    known = np.ascontiguousarray(stencil.known / dt)
    return kernels.assemble_triplets(
        n, frame.closed, np.ascontiguousarray(frame.lengths), mnorm, B, stencil.alpha / dt, known
    )


def assemble_closed(
    frame: SegmentFrame,
    stencil: Stencil,
    energy: SurfaceEnergy,
    dt: float,
    normals: Optional[np.ndarray] = None,
) -> LinearSystem:
    """System for a closed curve.

    ``frame`` describes the integration curve (lengths and angles for B);
    ``normals`` defaults to its unit normals.
    """
    if not frame.closed:
        raise ValidationError("assemble_closed needs a closed curve")
    rows, cols, vals, rhs = _triplets(frame, stencil, energy, dt, normals)
    return _finalize(rows, cols, vals, rhs, frame.n_nodes, True)


def assemble_ssd(
    frame: SegmentFrame,
    stencil: Stencil,
    energy: SurfaceEnergy,
    dt: float,
    substrate: SubstrateConfig,
    normals: Optional[np.ndarray] = None,
) -> LinearSystem:
    """System for an open curve with contact points on the substrate.

    Adds contact line friction and substrate tension to the x rows of the two
    endpoints and replaces their y rows by ``y = 0``.
    """
    if frame.closed:
        raise ValidationError("assemble_ssd needs an open curve")
    if not isinstance(substrate, SubstrateConfig):
        raise BadSubstrate("substrate configuration required")
    n = frame.n_nodes
    rows, cols, vals, rhs = _triplets(frame, stencil, energy, dt, normals)
    yrows = (2 * n, 3 * n - 1)
    keep = (rows != yrows[0]) & (rows != yrows[1])
    rows, cols, vals = rows[keep], cols[keep], vals[keep]

    coef = stencil.alpha / dt
    friction = -coef / substrate.eta
    known = stencil.known[:, 0] / (substrate.eta * dt)
    extra_rows = np.array([n, 2 * n - 1, yrows[0], yrows[1]])
    extra_cols = np.array([0, n - 1, n, 2 * n - 1])
    extra_vals = np.array([friction, friction, 1.0, 1.0])
    rhs = rhs.copy()
    rhs[n] += substrate.sigma - known[0]
    rhs[2 * n - 1] += -substrate.sigma - known[-1]
    rhs[list(yrows)] = 0.0
    return _finalize(
        np.concatenate([rows, extra_rows]),
        np.concatenate([cols, extra_cols]),
        np.concatenate([vals, extra_vals]),
        rhs,
        n,
        False,
    )


def solve(system: LinearSystem) -> np.ndarray:
    """Sparse LU solve with a residual check."""
    return _solve(system)[0]


def _solve(system: LinearSystem) -> tuple[np.ndarray, float]:
    A = system.matrix.tocsc()
    b = system.rhs
    try:
        lu = splu(A, permc_spec="COLAMD", diag_pivot_thresh=1.0)
    except RuntimeError as exc:
        raise SingularMatrix(str(exc)) from None
    if np.min(np.abs(lu.U.diagonal())) < 1e-300:
        raise SingularMatrix("zero pivot in LU factorization")
    x = lu.solve(b)
    if not np.all(np.isfinite(x)):
        raise SingularMatrix("non-finite solution")
    scale = 1.0 + np.max(np.abs(b))
    res = float(np.max(np.abs(A @ x - b)) / scale)
    if res >= RESIDUAL_TOL:
        # one step of iterative refinement with the same factors
        x = x + lu.solve(b - A @ x)
        res = float(np.max(np.abs(A @ x - b)) / scale)
    if res >= RESIDUAL_TOL:
        raise ResidualTooLarge(f"relative residual {res:.3e}")
    return x, res


def _unpack(x: np.ndarray, system: LinearSystem, topology) -> tuple[CurveState, np.ndarray]:
    n = system.n_nodes
    nodes = np.column_stack([x[:n], x[n : 2 * n]])
    if not system.closed:
        scale = 1.0 + np.max(np.abs(nodes))
        if abs(nodes[0, 1]) > PIN_TOL * scale or abs(nodes[-1, 1]) > PIN_TOL * scale:
            raise ResidualTooLarge("contact points left the substrate")
        nodes[0, 1] = 0.0
        nodes[-1, 1] = 0.0
    return CurveState(nodes, topology), x[2 * n :].copy()


def assemble(frame, stencil, energy, dt, substrate=None, normals=None) -> LinearSystem:
    if frame.closed:
        return assemble_closed(frame, stencil, energy, dt, normals)
    return assemble_ssd(frame, stencil, energy, dt, substrate, normals)


def solve_step(
    frame: SegmentFrame,
    stencil: Stencil,
    energy: SurfaceEnergy,
    dt: float,
    substrate: Optional[SubstrateConfig] = None,
    normals: Optional[np.ndarray] = None,
) -> SolveResult:
    """Assemble and solve one linear step; returns the candidate curve and potential."""
    system = assemble(frame, stencil, energy, dt, substrate, normals)
    x, res = _solve(system)
    topology = "closed" if frame.closed else "open"
    curve, mu = _unpack(x, system, topology)
    return SolveResult(curve, mu, res, 1)


def half_step_normals(curve: CurveState, candidate_nodes: np.ndarray) -> np.ndarray:
    """``-(h_bar + h)^perp / (2 |h|)`` per segment, lengths taken on ``curve``."""
    h = segment_vectors(curve.nodes, curve.closed)
    hb = segment_vectors(candidate_nodes, curve.closed)
    return -perp(h + hb) / (2.0 * np.hypot(h[:, 0], h[:, 1]))[:, None]


def csav_fixed_point(
    curve_prev: CurveState,
    energy: SurfaceEnergy,
    dt: float,
    substrate: Optional[SubstrateConfig] = None,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> SolveResult:
    """Solve the area-conserving step by lagging the half-step normal.

    Iterates until successive candidates differ by less than ``tol`` times the
    curve diameter (max node displacement).
    """
    frame = segment_frame(curve_prev)
    stencil = Stencil.bdf1(curve_prev)
    diameter = float(np.max(np.ptp(curve_prev.nodes, axis=0)))
    normals = frame.normals
    prev_nodes = None
    increments = []
    for k in range(1, max_iter + 1):
        result = solve_step(frame, stencil, energy, dt, substrate, normals)
        nodes = result.curve.nodes
        if prev_nodes is not None:
            inc = float(np.max(np.abs(nodes - prev_nodes)))
            increments.append(inc)
            if inc <= tol * diameter:
                # the first solve only supplies the starting guess
                result.iterations = k - 1
                return result
        prev_nodes = nodes
        normals = half_step_normals(curve_prev, nodes)
    growing = len(increments) >= 2 and increments[-1] > increments[-2]
    raise FixedPointDiverged(
        f"no convergence in {max_iter} iterations"
        + (f" (increments growing, last {increments[-1]:.3e})" if growing else "")
    )
