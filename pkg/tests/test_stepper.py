import numpy as np
import pytest
from conftest import bump_scenario, two_bump_scenario
from hypothesis import given
from hypothesis import strategies as st
from oracles import loop_gradient, loop_step

from ks1d import elliptic, stepper
from ks1d.model import InitialData, ScalarField, SolverState, build_grid


def test_one_step_matches_loop_oracle():
    sc = bump_scenario(n_cells=64, u0=InitialData("bump", (0.3, 1.2, 1.5)))
    state = stepper.initial_state(sc)
    dt = stepper.stable_dt(state, sc)
    new = stepper.step(state, sc, dt)
    u, v = state.u.values, state.v.values
    dv = loop_gradient(u, v, sc.gamma, sc.grid.dx)
    ref = loop_step(list(u), list(dv), sc.m, sc.q, sc.epsilon, sc.grid.dx, dt)
    np.testing.assert_allclose(new.u.values, ref, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(new.v.values, elliptic.solve(new.u, sc.gamma).values)


def test_drift_free_step_matches_oracle():
    sc = bump_scenario(n_cells=64, drift_enabled=False, epsilon=0.0)
    state = stepper.initial_state(sc)
    dt = stepper.stable_dt(state, sc)
    new = stepper.step(state, sc, dt)
    ref = loop_step(list(state.u.values), None, sc.m, sc.q, 0.0, sc.grid.dx, dt, drift=False)
    np.testing.assert_allclose(new.u.values, ref, rtol=1e-12, atol=1e-15)


def test_flux_vanishes_on_boundary_faces():
    sc = bump_scenario()
    flux = stepper.compute_flux(stepper.initial_state(sc), sc)
    assert flux.face_values[0] == 0.0 and flux.face_values[-1] == 0.0
    assert flux.face_values.size == sc.grid.n_cells + 1


def test_step_rejects_unstable_dt():
    sc = bump_scenario()
    state = stepper.initial_state(sc)
    with pytest.raises(stepper.StepError):
        stepper.step(state, sc, 2.0 * stepper.stable_dt(state, sc))


def test_step_rejects_non_finite_state():
    sc = bump_scenario()
    state = stepper.initial_state(sc)
    bad = state.u.values.copy()
    bad[5] = np.inf
    broken = SolverState(0.0, ScalarField(sc.grid, bad), state.v)
    with pytest.raises(stepper.StepError):
        stepper.compute_flux(broken, sc)


def test_zero_state_is_fixed_point():
    sc = bump_scenario(u0=InitialData("zero"))
    traj = stepper.run(sc)
    assert all(np.all(f.u.values == 0.0) for f in traj.frames)
    assert [d.linf_ok for d in traj.diagnostics] == ["pass"] * len(traj.frames)


def test_run_lands_on_frame_times():
    sc = bump_scenario()
    traj = stepper.run(sc)
    np.testing.assert_allclose(traj.times, stepper.frame_times(sc), rtol=0, atol=1e-15)
    assert traj.n_steps >= sc.n_frames


def test_zero_duration_run_has_one_frame():
    traj = stepper.run(bump_scenario(t_end=0.0))
    assert len(traj.frames) == 1


def test_mass_and_positivity_over_run():
    traj = stepper.run(two_bump_scenario(n_cells=256, n_frames=10))
    masses = np.array([d.mass for d in traj.diagnostics])
    assert np.abs(masses / masses[0] - 1).max() < 1e-12
    assert all(f.u.values.min() >= 0 for f in traj.frames)


def test_boundary_contact_aborts_with_partial_trajectory():
    sc = bump_scenario(grid=build_grid(-1.5, 1.5, 64), u0=InitialData("bump", (0, 1, 1)), t_end=0.5, n_frames=10)
    with pytest.raises(stepper.SimulationAborted) as info:
        stepper.run(sc)
    traj = info.value.trajectory
    assert traj.aborted and 1 <= len(traj.frames) < 11


def test_frames_past_window_are_flagged():
    traj = stepper.run(bump_scenario(t_end=0.02, n_frames=8))
    flags = [d.linf_ok for d in traj.diagnostics]
    inside = traj.inside_window()
    assert all((f == "pass") == ins for f, ins in zip(flags, inside))
    assert "outside-window" in flags


def test_support_spreads_at_finite_speed():
    sc = bump_scenario(n_cells=256, epsilon=0.0, drift_enabled=False, t_end=0.05, n_frames=5)
    traj = stepper.run(sc)
    x = sc.grid.centers
    for f in traj.frames:
        idx = np.flatnonzero(f.u.values > 1e-12)
        assert x[idx[-1]] < 1.5


def test_lipschitz_of_constant_is_zero():
    sc = bump_scenario()
    assert stepper.lipschitz_w(np.ones(10), sc, 0.1) == 0.0


@given(
    c=st.floats(-0.8, 0.8),
    w=st.floats(0.3, 1.2),
    h=st.floats(0.1, 3.0),
    eps=st.sampled_from([0.0, 0.01, 0.1]),
    q=st.sampled_from([3.0, 4.0, 6.0]),
)
def test_step_conserves_mass_and_sign(c, w, h, eps, q):
    sc = bump_scenario(n_cells=96, u0=InitialData("bump", (c, w, h)), epsilon=eps, q=q)
    state = stepper.initial_state(sc)
    for _ in range(5):
        state = stepper.step(state, sc, stepper.stable_dt(state, sc))
    assert state.u.values.min() >= 0.0
    assert state.u.mass() == pytest.approx(sc.initial_field().mass(), rel=1e-12)
