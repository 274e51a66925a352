"""Explicit conservative finite-volume stepping of the regularised density equation.

The density obeys ``u_t = d/dx( d/dx (u+eps)^m - (u+eps)^(q-2) u dv/dx )``.
Diffusion is the exact face difference of ``(u+eps)^m``; the drift
mobility is upwinded on the sign of ``dv/dx`` at the face.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import elliptic
from .model import (
    BOUNDARY_CELLS,
    FrameDiagnostics,
    Grid1D,
    ScalarField,
    Scenario,
    SolverState,
    Trajectory,
)

log = logging.getLogger(__name__)

CLAMP_TOL = 1e-13
MASS_TOL = 1e-13
SUPPORT_TOL = 1e-12
LINF_SLACK = 1e-10


class StepError(RuntimeError):
    """A step violated stability, positivity or conservation."""


class SimulationAborted(RuntimeError):
    def __init__(self, message: str, trajectory: Trajectory):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True, eq=False)
class FluxField:
    grid: Grid1D
    face_values: np.ndarray

    def __post_init__(self) -> None:
        if self.face_values.shape != (self.grid.n_cells + 1,):
            raise ValueError("flux needs n_cells + 1 face values")
        if self.face_values[0] != 0.0 or self.face_values[-1] != 0.0:
            raise ValueError("boundary faces must carry zero flux")


def _flux_array(u: np.ndarray, dvdx: np.ndarray | None, sc: Scenario, dx: float) -> np.ndarray:
    ue = u + sc.epsilon
    p = ue**sc.m
    faces = np.zeros(u.size + 1)
    inner = (p[1:] - p[:-1]) / dx
    if sc.drift_enabled and dvdx is not None:
        c = 0.5 * (dvdx[1:] + dvdx[:-1])
        mobility = ue ** (sc.q - 2.0) * u
        inner -= np.where(c > 0.0, mobility[:-1], mobility[1:]) * c
    faces[1:-1] = inner
    return faces


def _dvdx(u: ScalarField, v: ScalarField, sc: Scenario) -> np.ndarray:
    return elliptic.gradient(u, v, sc.gamma).values


def compute_flux(state: SolverState, scenario: Scenario) -> FluxField:
    u = state.u.values
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(state.v.values))):
        raise StepError("non-finite field values")
    dvdx = _dvdx(state.u, state.v, scenario) if scenario.drift_enabled else None
    return FluxField(state.u.grid, _flux_array(u, dvdx, scenario, state.u.grid.dx))


def _stable_dt(u_max: float, dvdx_max: float, sc: Scenario, dx: float) -> float:
    top = u_max + sc.epsilon
    diff_coef = 2.0 * sc.m * top ** (sc.m - 1.0)
    dt_diff = dx * dx / diff_coef if diff_coef > 0 else np.inf
    speed = top ** (sc.q - 2.0) * dvdx_max if sc.drift_enabled else 0.0
    dt_drift = dx / (speed + 1e-30)
    return sc.cfl_sigma * min(dt_diff, dt_drift)


def stable_dt(state: SolverState, scenario: Scenario) -> float:
    """CFL-limited time step for the explicit update."""
    g = np.abs(_dvdx(state.u, state.v, scenario)).max() if scenario.drift_enabled else 0.0
    return _stable_dt(state.u.max(), float(g), scenario, state.u.grid.dx)


def _advance(u: np.ndarray, dvdx, sc: Scenario, dx: float, dt: float) -> tuple[np.ndarray, float]:
    flux = _flux_array(u, dvdx, sc, dx)
    new = u + (dt / dx) * np.diff(flux)
    before = np.sum(u)
    after = np.sum(new)
    scale = max(before, np.sum(np.abs(new)), 1e-300)
    if abs(after - before) > MASS_TOL * scale:
        raise StepError(f"mass drift {abs(after - before) / scale:.3e} in one step")
    low = new.min()
    clamped = 0.0
    if low < 0.0:
        if low < -CLAMP_TOL:
            raise StepError(f"positivity lost: min u = {low:.3e}")
        neg = new < 0.0
        clamped = -float(np.sum(new[neg])) * dx
        new[neg] = 0.0
    return new, clamped


def step(state: SolverState, scenario: Scenario, dt: float) -> SolverState:
    """Advance one explicit Euler step and refresh v."""
    limit = stable_dt(state, scenario)
    if dt > limit * (1.0 + 1e-12):
        raise StepError(f"dt={dt:.3e} exceeds stable limit {limit:.3e}")
    if not np.all(np.isfinite(state.u.values)):
        raise StepError("non-finite field values")
    dvdx = _dvdx(state.u, state.v, scenario) if scenario.drift_enabled else None
    new, clamped = _advance(state.u.values, dvdx, scenario, state.u.grid.dx, dt)
    if clamped:
        log.info("clamped %.3e of negative mass at t=%g", clamped, state.t + dt)
    u_new = ScalarField(state.u.grid, new)
    return SolverState(state.t + dt, u_new, elliptic.solve(u_new, scenario.gamma))


def initial_state(scenario: Scenario) -> SolverState:
    u0 = scenario.initial_field()
    return SolverState(0.0, u0, elliptic.solve(u0, scenario.gamma))


def lipschitz_w(u: np.ndarray, sc: Scenario, dx: float) -> float:
    """max over faces of |Δ(u+eps)^(m-1)| / dx."""
    if u.size < 2:
        return 0.0
    return float(np.max(np.abs(np.diff((u + sc.epsilon) ** (sc.m - 1.0)))) / dx)


def frame_diagnostics(state: SolverState, sc: Scenario) -> FrameDiagnostics:
    u = state.u.values
    dvdx = elliptic.gradient(state.u, state.v, sc.gamma).values
    max_u = float(u.max())
    if state.t < sc.t0_window:
        ok = "pass" if max_u <= sc.u0_sup + 2.0 + LINF_SLACK else "fail"
    else:
        ok = "outside-window"
    return FrameDiagnostics(
        t=state.t,
        mass=state.u.mass(),
        max_u=max_u,
        lip_w=lipschitz_w(u, sc, state.u.grid.dx),
        sup_dxv=float(np.abs(dvdx).max()),
        linf_ok=ok,
    )


def _touches_boundary(u: np.ndarray) -> bool:
    k = BOUNDARY_CELLS
    return bool(np.any(u[:k] > SUPPORT_TOL) or np.any(u[-k:] > SUPPORT_TOL))


def frame_times(scenario: Scenario) -> np.ndarray:
    if scenario.t_end == 0.0:
        return np.array([0.0])
    return np.linspace(0.0, scenario.t_end, scenario.n_frames + 1)


def run(scenario: Scenario) -> Trajectory:
    """Integrate to ``t_end``, storing frames at ``n_frames`` equal intervals."""
    traj = Trajectory(scenario)
    state = initial_state(scenario)
    traj.append(state, frame_diagnostics(state, scenario))
    grid = scenario.grid
    dx = grid.dx
    u = state.u.values.copy()
    t = 0.0
    try:
        for target in frame_times(scenario)[1:]:
            while t < target:
                if scenario.drift_enabled:
                    uf = ScalarField(grid, u)
                    dvdx = elliptic.gradient(uf, elliptic.solve(uf, scenario.gamma), scenario.gamma).values
                    gmax = float(np.abs(dvdx).max())
                else:
                    dvdx, gmax = None, 0.0
                if not np.all(np.isfinite(u)):
                    raise StepError("non-finite field values")
                dt = _stable_dt(float(u.max()), gmax, scenario, dx)
                if t + dt >= target * (1.0 - 1e-14):
                    dt = target - t
                    t_next = target
                else:
                    t_next = t + dt
                u, clamped = _advance(u, dvdx, scenario, dx, dt)
                if clamped:
                    traj.clamped_mass += clamped
                    log.info("clamped %.3e of negative mass at t=%g", clamped, t_next)
                t = t_next
                traj.n_steps += 1
            if _touches_boundary(u):
                raise StepError(f"support within {BOUNDARY_CELLS} cells of the boundary at t={t:g}")
            uf = ScalarField(grid, u.copy())
            state = SolverState(t, uf, elliptic.solve(uf, scenario.gamma))
            traj.append(state, frame_diagnostics(state, scenario))
    except StepError as exc:
        traj.aborted = str(exc)
        raise SimulationAborted(str(exc), traj) from exc
    return traj
