"""Energy-stable SAV time stepping: BDF1-SAV, BDF1-CSAV and BDF2-SAV.

Each step solves the linear (or lagged-normal) system for a candidate curve
``X_bar`` and potential ``mu_bar``, advances the auxiliary energy ``R`` by

    xi = R / (W(X_bar) + dt * D),   R_next = xi * W(X_bar)

and scales the candidate about the origin by ``zeta = 1 - (1 - xi)^r``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

import numpy as np

from .assembly import SolveResult, Stencil, csav_fixed_point, solve_step
from .energy import SurfaceEnergy, discrete_energy, pd_check
from .errors import EnergyIncreased, NonpositiveEnergy, NotPositiveDefinite, OrientationHazard, ValidationError
from .geometry import CurveState, enclosed_area, segment_frame, stiffness_pairing
from .ssd import SubstrateConfig, ssd_energy

ENERGY_SLACK = 1e-12


class Scheme(str, enum.Enum):
    BDF1_SAV = "bdf1_sav"
    BDF1_CSAV = "bdf1_csav"
    BDF2_SAV = "bdf2_sav"

    @property
    def default_r(self) -> int:
        return 3 if self is Scheme.BDF2_SAV else 2


def xi_update(R_prev: float, W_bar: float, dissipation: float, dt: float) -> tuple[float, float]:
    """Return ``(xi, R_next)`` with ``xi = R_prev / (W_bar + dt * dissipation)``."""
    if not W_bar > 0:
        raise NonpositiveEnergy(f"candidate energy {W_bar!r} is not positive")
    if dissipation < 0:
        raise ValidationError("dissipation must be nonnegative")
    if R_prev < 0:
        raise ValidationError("auxiliary energy must be nonnegative")
    xi = R_prev / (W_bar + dt * dissipation)
    return xi, xi * W_bar


def zeta(xi: float, r: int) -> float:
    return 1.0 - (1.0 - xi) ** r


def curve_energy(curve: CurveState, energy: SurfaceEnergy, substrate: Optional[SubstrateConfig] = None) -> float:
    frame = segment_frame(curve)
    if curve.closed:
        return discrete_energy(curve, frame, energy)
    return ssd_energy(curve, frame, energy, substrate)


@dataclass(frozen=True)
class SavState:
    curve: CurveState
    energy: SurfaceEnergy
    scheme: Scheme
    dt: float
    r: int
    substrate: Optional[SubstrateConfig] = None
    prev_curve: Optional[CurveState] = None
    aux: float = math.nan
    t: float = 0.0
    m: int = 0
    mu: Optional[np.ndarray] = field(default=None, compare=False)
    aux0: float = math.nan
    area0: float = math.nan
    csav_tol: float = 1e-12
    csav_max_iter: int = 50

    @classmethod
    def initial(
        cls,
        curve: CurveState,
        energy: SurfaceEnergy,
        scheme,
        dt: float,
        r: Optional[int] = None,
        substrate: Optional[SubstrateConfig] = None,
        **kw,
    ) -> "SavState":
        scheme = Scheme(scheme)
        r = scheme.default_r if r is None else int(r)
        if r < 2:
            raise ValidationError(f"r must be >= 2, got {r}")
        if not dt > 0:
            raise ValidationError(f"dt must be positive, got {dt}")
        if not curve.closed and substrate is None:
            raise ValidationError("an open curve needs a substrate configuration")
        report = pd_check(energy)
        if not report.passed:
            raise NotPositiveDefinite(
                f"B(theta) loses definiteness at theta={report.argmin_theta:.4f} "
                f"(min eigenvalue {report.min_eigenvalue:.3e})"
            )
        R0 = curve_energy(curve, energy, substrate)
        if R0 < 0:
            raise NonpositiveEnergy(f"initial energy {R0} is negative")
        return cls(
            curve, energy, scheme, float(dt), r, substrate, None, R0, 0.0, 0, None, R0, enclosed_area(curve), **kw
        )


@dataclass(frozen=True)
class StepDiagnostics:
    m: int
    t: float
    R: float
    W: float
    dW: float
    A: float
    dA_rel: float
    psi: float
    xi: float
    zeta: float
    D: float
    x_l: float
    x_r: float
    fp_iters: int
    W_bar: float = math.nan
    area_bar_defect: float = 0.0

    CSV_COLUMNS = ("m", "t", "R", "W_h", "dW", "A_h", "dA_rel", "psi", "xi", "zeta", "D", "x_l", "x_r", "fp_iters")

    def csv_row(self) -> tuple:
        return (
            self.m, self.t, self.R, self.W, self.dW, self.A, self.dA_rel,
            self.psi, self.xi, self.zeta, self.D, self.x_l, self.x_r, self.fp_iters,
        )


def _diagnostics(state: SavState, **extra) -> StepDiagnostics:
    curve = state.curve
    frame = segment_frame(curve)
    W = curve_energy(curve, state.energy, state.substrate)
    A = enclosed_area(curve)
    base = dict(
        m=state.m,
        t=state.t,
        R=state.aux,
        W=W,
        dW=abs(state.aux - W),
        A=A,
        dA_rel=(A - state.area0) / state.area0 if state.area0 else math.nan,
        psi=float(frame.lengths.max() / frame.lengths.min()),
        xi=1.0,
        zeta=1.0,
        D=0.0,
        x_l=math.nan if curve.closed else float(curve.x[0]),
        x_r=math.nan if curve.closed else float(curve.x[-1]),
        fp_iters=0,
    )
    base.update(extra)
    return StepDiagnostics(**base)


def initial_diagnostics(state: SavState) -> StepDiagnostics:
    return _diagnostics(state)


@dataclass
class StepOutput:
    state: SavState
    diagnostics: StepDiagnostics
    candidate: CurveState
    candidate_mu: np.ndarray


def _candidate(state: SavState) -> SolveResult:
    curve, energy, dt, sub = state.curve, state.energy, state.dt, state.substrate
    if state.scheme is Scheme.BDF1_CSAV:
        return csav_fixed_point(curve, energy, dt, sub, state.csav_tol, state.csav_max_iter)
    frame = segment_frame(curve)
    if state.scheme is Scheme.BDF1_SAV or state.prev_curve is None:
        # BDF2 starts from one BDF1-SAV step
        return solve_step(frame, Stencil.bdf1(curve), energy, dt, sub)
    predictor = solve_step(frame, Stencil.bdf1(curve), energy, dt, sub).curve
    result = solve_step(segment_frame(predictor), Stencil.bdf2(curve, state.prev_curve), energy, dt, sub)
    result.iterations = 2
    return result


def advance(state: SavState) -> StepOutput:
    """One full SAV step, keeping the intermediate candidate for inspection."""
    sol = _candidate(state)
    bar = sol.curve
    frame_bar = segment_frame(bar)
    D = stiffness_pairing(sol.mu, sol.mu, frame_bar)
    if not bar.closed:
        eta, dt = state.substrate.eta, state.dt
        vl = (bar.x[0] - state.curve.x[0]) / dt
        vr = (bar.x[-1] - state.curve.x[-1]) / dt
        D += (vl * vl + vr * vr) / eta
    W_bar = curve_energy(bar, state.energy, state.substrate)
    xi, R_next = xi_update(state.aux, W_bar, D, state.dt)
    z = zeta(xi, state.r)
    if z < 0 and not state.energy.pi_periodic:
        raise OrientationHazard(f"zeta = {z:.3e} < 0 with a gamma that is not pi-periodic")
    if z <= 0 and not bar.closed:
        raise OrientationHazard(f"zeta = {z:.3e} would flip the film through the substrate")
    if R_next > state.aux + ENERGY_SLACK * state.aux0:
        raise EnergyIncreased(f"R grew from {state.aux!r} to {R_next!r} at step {state.m + 1}")
    new_curve = bar.with_nodes(z * bar.nodes)
    new_state = replace(
        state,
        curve=new_curve,
        prev_curve=state.curve,
        aux=R_next,
        t=(state.m + 1) * state.dt,
        m=state.m + 1,
        mu=z * sol.mu,
    )
    diag = _diagnostics(
        new_state,
        xi=xi,
        zeta=z,
        D=D,
        fp_iters=sol.iterations if state.scheme is Scheme.BDF1_CSAV else 0,
        W_bar=W_bar,
        area_bar_defect=enclosed_area(bar) - enclosed_area(state.curve),
    )
    return StepOutput(new_state, diag, bar, sol.mu)


def step(state: SavState) -> tuple[SavState, StepDiagnostics]:
    out = advance(state)
    return out.state, out.diagnostics


Observer = Callable[[SavState, StepDiagnostics], None]


@dataclass
class RunResult:
    trajectory: list[StepDiagnostics]
    final: SavState

    @property
    def curve(self) -> CurveState:
        return self.final.curve


def step_count(T: float, dt: float) -> int:
    M = round(T / dt)
    if M < 0 or abs(M * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValidationError(f"T={T} is not an integer multiple of dt={dt}")
    return int(M)


def run(state0: SavState, T: float, observers: Iterable[Observer] = ()) -> RunResult:
    """Advance ``state0`` to time ``T``; the trajectory starts with the m = 0 record."""
    M = step_count(T, state0.dt)
    observers = list(observers)
    state = state0
    first = initial_diagnostics(state)
    trajectory = [first]
    for obs in observers:
        obs(state, first)
    for _ in range(M):
        state, diag = step(state)
        trajectory.append(diag)
        for obs in observers:
            obs(state, diag)
    return RunResult(trajectory, state)
