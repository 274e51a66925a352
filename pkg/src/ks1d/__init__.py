"""Finite-volume solver for the 1D degenerate parabolic-elliptic Keller-Segel system."""

from .model import Grid1D, InitialData, ScalarField, Scenario, ScenarioError, Trajectory, build_grid
from .stepper import SimulationAborted, run

__all__ = [
    "Grid1D",
    "InitialData",
    "ScalarField",
    "Scenario",
    "ScenarioError",
    "SimulationAborted",
    "Trajectory",
    "build_grid",
    "run",
]
__version__ = "0.1.0"
