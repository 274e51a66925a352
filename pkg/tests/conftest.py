import sys
from pathlib import Path

import pytest
from hypothesis import settings

from ks1d.config import bundled_scenarios, load
from ks1d.model import InitialData, Scenario, build_grid

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def two_bump_scenario(n_cells=512, epsilon=0.05, n_frames=60, **kw):
    return Scenario(
        m=2.0,
        gamma=1.0,
        q=4.0,
        epsilon=epsilon,
        grid=build_grid(-6, 6, n_cells),
        u0=InitialData("two_bumps", (-2, 2, 1, 1)),
        t_end=0.012,
        hole=(-1.0, 1.0),
        n_frames=n_frames,
        **kw,
    )


def bump_scenario(n_cells=128, **kw):
    base = dict(
        m=2.0,
        gamma=1.0,
        q=4.0,
        epsilon=0.05,
        grid=build_grid(-4, 4, n_cells),
        u0=InitialData("bump", (0, 1, 1)),
        t_end=0.005,
        n_frames=5,
    )
    base.update(kw)
    return Scenario(**base)


@pytest.fixture
def bundled():
    return {name: load(path) for name, path in bundled_scenarios().items()}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
