"""Grid, fields, scenarios and trajectories shared by every other module."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

MIN_CELLS = 16
BOUNDARY_CELLS = 10
NEGATIVE_TOL = 1e-14


class ScenarioError(ValueError):
    """Raised for an invalid scenario or initial-data descriptor."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centred mesh on ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ScenarioError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise ScenarioError("x_min must be smaller than x_max")
        if int(self.n_cells) != self.n_cells or self.n_cells < MIN_CELLS:
            raise ScenarioError(f"n_cells must be an integer >= {MIN_CELLS}")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def faces(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx

    def refined(self, n_cells: int) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, n_cells)


def build_grid(x_min: float, x_max: float, n_cells: int) -> Grid1D:
    g = Grid1D(float(x_min), float(x_max), n_cells)
    return Grid1D(g.x_min, g.x_max, int(g.n_cells))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Cell values of one quantity on a grid."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_cells,):
            raise ScenarioError(
                f"field has {values.shape} values, grid has {self.grid.n_cells} cells"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def mass(self) -> float:
        return float(self.grid.dx * np.sum(self.values))

    def max(self) -> float:
        return float(np.max(self.values))

    def check_nonnegative(self, name: str = "field", tol: float = NEGATIVE_TOL) -> None:
        low = float(np.min(self.values))
        if low < -tol:
            raise ValueError(f"{name} has negative entry {low:.3e}")

    def same_grid(self, other: "ScalarField") -> bool:
        return self.grid == other.grid


@dataclass(frozen=True)
class InitialData:
    """Descriptor of an initial profile.

    ``kind`` is one of ``zero``, ``bump``, ``two_bumps`` or ``barenblatt``;
    ``params`` are, respectively, ``()``, ``(center, width, height)``,
    ``(c1, c2, width, height)`` and ``(t0, mass)``.
    """

    kind: str
    params: tuple[float, ...] = ()

    _ARITY = {"zero": 0, "bump": 3, "two_bumps": 4, "barenblatt": 2}

    def __post_init__(self) -> None:
        if self.kind not in self._ARITY:
            raise ScenarioError(f"unknown initial data kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        if len(params) != self._ARITY[self.kind]:
            raise ScenarioError(
                f"{self.kind} takes {self._ARITY[self.kind]} parameters, got {len(params)}"
            )
        object.__setattr__(self, "params", params)
        if self.kind == "bump":
            _, width, height = params
            _check_bump(width, height)
        elif self.kind == "two_bumps":
            c1, c2, width, height = params
            _check_bump(width, height)
            if abs(c2 - c1) < 2 * width:
                raise ScenarioError("two_bumps supports overlap")
        elif self.kind == "barenblatt":
            t0, mass = params
            if t0 <= 0 or mass <= 0:
                raise ScenarioError("barenblatt needs t0 > 0 and mass > 0")

    def support(self, m: float) -> tuple[float, float] | None:
        """Closed interval containing the support, or None for zero data."""
        p = self.params
        if self.kind == "zero":
            return None
        if self.kind == "bump":
            return (p[0] - p[1], p[0] + p[1])
        if self.kind == "two_bumps":
            lo, hi = sorted(p[:2])
            return (lo - p[2], hi + p[2])
        from .pme import BarenblattProfile

        edge = BarenblattProfile.from_mass(m, p[1]).edge(p[0])
        return (-edge, edge)

    def sup_norm(self, m: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind in ("bump", "two_bumps"):
            return self.params[-1]
        from .pme import BarenblattProfile

        return BarenblattProfile.from_mass(m, self.params[1]).value(0.0, self.params[0])

    def analytic_mass(self, m: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "barenblatt":
            return self.params[1]
        width, height = self.params[-2], self.params[-1]
        one = height * width * _cap_integral(1.0 / (m - 1.0))
        return one if self.kind == "bump" else 2.0 * one


def _check_bump(width: float, height: float) -> None:
    if height <= 0:
        raise ScenarioError("bump height must be positive")
    if width <= 0:
        raise ScenarioError("bump width must be positive")


def _cap_integral(p: float) -> float:
    # int_{-1}^{1} (1 - s^2)^p ds
    return math.exp(math.lgamma(0.5) + math.lgamma(p + 1.0) - math.lgamma(p + 1.5))


def bump_values(x: np.ndarray, center: float, width: float, height: float, m: float) -> np.ndarray:
    cap = np.maximum(0.0, 1.0 - ((x - center) / width) ** 2)
    return height * cap ** (1.0 / (m - 1.0))


def sample_initial_data(descriptor: InitialData, grid: Grid1D, m: float) -> ScalarField:
    """Sample an initial profile at cell centres."""
    x = grid.centers
    p = descriptor.params
    if descriptor.kind == "zero":
        values = np.zeros_like(x)
    elif descriptor.kind == "bump":
        values = bump_values(x, p[0], p[1], p[2], m)
    elif descriptor.kind == "two_bumps":
        values = bump_values(x, p[0], p[2], p[3], m) + bump_values(x, p[1], p[2], p[3], m)
    else:
        from .pme import BarenblattProfile

        values = BarenblattProfile.from_mass(m, p[1]).value(x, p[0])
    return ScalarField(grid, values)


@dataclass(frozen=True)
class Scenario:
    """Full problem description for one run."""

    m: float
    gamma: float
    q: float
    epsilon: float
    grid: Grid1D
    u0: InitialData
    t_end: float
    drift_enabled: bool = True
    cfl_sigma: float = 0.4
    hole: tuple[float, float] | None = None
    n_frames: int = 20

    def __post_init__(self) -> None:
        if not self.m > 1:
            raise ScenarioError("m must exceed 1")
        if not self.gamma > 0:
            raise ScenarioError("gamma must be positive")
        if not self.q >= 2:
            raise ScenarioError("q must be at least 2")
        if not self.epsilon >= 0:
            raise ScenarioError("epsilon must be nonnegative")
        if not 0 < self.cfl_sigma < 1:
            raise ScenarioError("cfl_sigma must lie in (0, 1)")
        if not self.t_end >= 0:
            raise ScenarioError("t_end must be nonnegative")
        if self.n_frames < 1:
            raise ScenarioError("n_frames must be positive")
        support = self.u0.support(self.m)
        g = self.grid
        if support is not None:
            lo, hi = support
            margin = BOUNDARY_CELLS * g.dx
            if not (lo > g.x_min + margin and hi < g.x_max - margin):
                raise ScenarioError(
                    f"initial support [{lo}, {hi}] is within {BOUNDARY_CELLS} cells of the boundary"
                )
        if self.hole is not None:
            a, b = self.hole
            if not a < b:
                raise ScenarioError("hole needs a < b")
            if not (g.x_min < a and b < g.x_max):
                raise ScenarioError("hole must lie inside the grid")
            u0 = sample_initial_data(self.u0, g, self.m)
            inside = (g.centers >= a) & (g.centers <= b)
            if np.any(u0.values[inside] > 0):
                raise ScenarioError("initial data is not zero on the hole")

    @property
    def theory_applicable(self) -> bool:
        """Whether the hypothesis q >= 2m of the Lipschitz estimate holds."""
        return self.q >= 2 * self.m

    @property
    def exploratory(self) -> bool:
        return not self.theory_applicable

    @property
    def u0_sup(self) -> float:
        return self.u0.sup_norm(self.m)

    @property
    def t0_window(self) -> float:
        """Guaranteed existence time (sup u0 + 2)^(-q)."""
        return (self.u0_sup + 2.0) ** (-self.q)

    def initial_field(self) -> ScalarField:
        return sample_initial_data(self.u0, self.grid, self.m)

    def with_(self, **changes: Any) -> "Scenario":
        return replace(self, **changes)

    def with_cells(self, n_cells: int) -> "Scenario":
        return replace(self, grid=self.grid.refined(n_cells))


@dataclass
class SolverState:
    t: float
    u: ScalarField
    v: ScalarField


@dataclass
class FrameDiagnostics:
    t: float
    mass: float
    max_u: float
    lip_w: float
    sup_dxv: float
    linf_ok: str  # "pass", "fail" or "outside-window"


@dataclass
class Trajectory:
    """Time-ordered frames of one run plus per-frame diagnostics."""

    scenario: Scenario
    frames: list[SolverState] = field(default_factory=list)
    diagnostics: list[FrameDiagnostics] = field(default_factory=list)
    clamped_mass: float = 0.0
    n_steps: int = 0
    aborted: str | None = None

    @property
    def t0_window(self) -> float:
        return self.scenario.t0_window

    @property
    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.frames])

    @property
    def grid(self) -> Grid1D:
        return self.scenario.grid

    def append(self, state: SolverState, diag: FrameDiagnostics) -> None:
        if self.frames and not state.t > self.frames[-1].t:
            raise ValueError("frame times must increase strictly")
        if not self.frames and state.t != 0.0:
            raise ValueError("first frame must be at t=0")
        self.frames.append(state)
        self.diagnostics.append(diag)

    def inside_window(self) -> list[bool]:
        return [f.t < self.t0_window for f in self.frames]
