"""Inner interface curves of a vacuum region, the cone-mass identity and vacuum checks.

The curves follow ``xi' = -d/dx w + (u+eps)^(q-3) u dv/dx`` with
``w = m/(m-1) (u+eps)^(m-1)`` (convention ``intro``), which is the
velocity ``-F/(u+eps)`` of the regularised mass flux: along such curves
the integral of ``u+eps`` between them is conserved.  Convention
``section4`` flips the sign of both terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import elliptic
from .model import Scenario, SolverState, Trajectory

CONVENTIONS = ("intro", "section4")


class InterfaceEscape(RuntimeError):
    def __init__(self, message: str, partial: "InterfacePair"):
        super().__init__(message)
        self.partial = partial


@dataclass
class InterfacePair:
    times: np.ndarray
    xi: np.ndarray
    Xi: np.ndarray
    a: float
    b: float
    sign_convention: str = "intro"

    def ordered(self) -> bool:
        return bool(np.all(self.xi < self.Xi))

    def max_speed(self) -> float:
        if self.times.size < 2:
            return 0.0
        dt = np.diff(self.times)
        return float(max(np.abs(np.diff(self.xi) / dt).max(), np.abs(np.diff(self.Xi) / dt).max()))


@dataclass
class VelocityProfile:
    """Samples of the diffusive and drift velocity parts on one frame."""

    face_x: np.ndarray
    grad_w: np.ndarray
    cell_x: np.ndarray
    drift: np.ndarray
    x_lo: float
    x_hi: float

    def __call__(self, x: float, convention: str) -> float:
        if not self.x_lo <= x <= self.x_hi:
            raise ValueError(f"x={x} outside the grid interior")
        gw = float(np.interp(x, self.face_x, self.grad_w))
        dr = float(np.interp(x, self.cell_x, self.drift))
        if convention == "intro":
            return -gw + dr
        if convention == "section4":
            return gw - dr
        raise ValueError(f"unknown convention {convention!r}")


def drift_mobility(u: np.ndarray, sc: Scenario) -> np.ndarray:
    """``(u+eps)^(q-3) u``, taken as ``u^(q-2)`` when eps = 0."""
    ue = u + sc.epsilon
    out = np.zeros_like(u)
    pos = ue > 0
    out[pos] = ue[pos] ** (sc.q - 3.0) * u[pos]
    return out


def velocity_profile(u: np.ndarray, v: np.ndarray, sc: Scenario) -> VelocityProfile:
    grid = sc.grid
    dx = grid.dx
    w = sc.m / (sc.m - 1.0) * (u + sc.epsilon) ** (sc.m - 1.0)
    grad_w = np.diff(w) / dx
    face_x = grid.faces[1:-1]
    if sc.drift_enabled:
        from .model import ScalarField

        dvdx = elliptic.gradient(ScalarField(grid, u), ScalarField(grid, v), sc.gamma).values
        drift = drift_mobility(u, sc) * dvdx
    else:
        drift = np.zeros_like(u)
    return VelocityProfile(face_x, grad_w, grid.centers, drift, face_x[0], face_x[-1])


def interface_velocity(state: SolverState, scenario: Scenario, x: float, convention: str = "intro") -> float:
    return velocity_profile(state.u.values, state.v.values, scenario)(x, convention)


def _frame_profiles(trajectory: Trajectory) -> list[VelocityProfile]:
    sc = trajectory.scenario
    return [velocity_profile(f.u.values, f.v.values, sc) for f in trajectory.frames]


def integrate_interfaces(
    trajectory: Trajectory, a: float, b: float, convention: str = "intro"
) -> InterfacePair:
    """Heun integration of both curves with step equal to the frame spacing."""
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    if not a < b:
        raise ValueError("need a < b")
    times = trajectory.times
    profiles = _frame_profiles(trajectory)
    xi = np.empty(times.size)
    Xi = np.empty(times.size)
    xi[0], Xi[0] = a, b
    for k in range(times.size - 1):
        h = times[k + 1] - times[k]
        try:
            for arr in (xi, Xi):
                k1 = profiles[k](arr[k], convention)
                k2 = profiles[k + 1](arr[k] + h * k1, convention)
                arr[k + 1] = arr[k] + 0.5 * h * (k1 + k2)
        except ValueError as exc:
            partial = InterfacePair(times[: k + 1], xi[: k + 1], Xi[: k + 1], a, b, convention)
            raise InterfaceEscape(str(exc), partial) from exc
    return InterfacePair(times, xi, Xi, a, b, convention)


def _overlap_weights(faces: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Fraction of each cell covered by ``[lo, hi]``."""
    dx = faces[1] - faces[0]
    left = np.maximum(faces[:-1], lo)
    right = np.minimum(faces[1:], hi)
    return np.clip(right - left, 0.0, None) / dx


def interval_integral(trajectory: Trajectory, frame_index: int, lo: float, hi: float, shift: float) -> float:
    grid = trajectory.grid
    u = trajectory.frames[frame_index].u.values
    weights = _overlap_weights(grid.faces, lo, hi)
    return float(grid.dx * np.sum(weights * (u + shift)))


def cone_mass(trajectory: Trajectory, pair: InterfacePair, frame_index: int) -> float:
    """Integral of ``u + eps`` between the two curves at one frame."""
    if not 0 <= frame_index < min(len(trajectory.frames), pair.times.size):
        raise IndexError(f"frame index {frame_index} out of range")
    eps = trajectory.scenario.epsilon
    return interval_integral(trajectory, frame_index, pair.xi[frame_index], pair.Xi[frame_index], eps)


def cone_mass_drift(trajectory: Trajectory, pair: InterfacePair, frames: int | None = None) -> np.ndarray:
    """Deviation of the cone mass from its initial value, per frame.

    Relative to the initial cone mass, floored at the mass of one full cell
    (``dx * max u0``) so that a vacuum cone with ``eps = 0`` is not divided
    by a value below grid resolution.
    """
    n = pair.times.size if frames is None else frames
    masses = np.array([cone_mass(trajectory, pair, k) for k in range(n)])
    floor = trajectory.grid.dx * trajectory.frames[0].u.max()
    scale = max(masses[0], floor)
    if scale == 0.0:
        return np.abs(masses - masses[0])
    return np.abs(masses - masses[0]) / scale


@dataclass
class VacuumReport:
    times: np.ndarray
    interior_max_u: np.ndarray
    interior_integral: np.ndarray
    epsilon: float
    dx: float
    margin: float
    notes: list[str] = field(default_factory=list)

    @property
    def worst(self) -> float:
        return float(self.interior_max_u.max()) if self.interior_max_u.size else 0.0


def vacuum_check(trajectory: Trajectory, pair: InterfacePair, margin: float | None = None) -> VacuumReport:
    """Max and integral of u strictly inside ``(xi + margin, Xi - margin)`` per frame."""
    grid = trajectory.grid
    dx = grid.dx
    margin = 2.0 * dx if margin is None else margin
    x = grid.centers
    n = pair.times.size
    maxes = np.zeros(n)
    integrals = np.zeros(n)
    for k in range(n):
        u = trajectory.frames[k].u.values
        lo, hi = pair.xi[k] + margin, pair.Xi[k] - margin
        inside = (x > lo) & (x < hi)
        maxes[k] = float(u[inside].max()) if np.any(inside) else 0.0
        integrals[k] = interval_integral(trajectory, k, pair.xi[k], pair.Xi[k], 0.0)
    return VacuumReport(pair.times.copy(), maxes, integrals, trajectory.scenario.epsilon, dx, margin)


def hole_lifetime_index(pair: InterfacePair) -> int:
    """Number of leading frames with ``xi < Xi``."""
    closed = np.flatnonzero(pair.xi >= pair.Xi)
    return int(closed[0]) if closed.size else pair.times.size
