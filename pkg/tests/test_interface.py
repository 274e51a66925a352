import numpy as np
import pytest
from conftest import bump_scenario, two_bump_scenario
from oracles import frame_velocity, rk4_curve

from ks1d import elliptic, interface, pme, stepper
from ks1d.model import InitialData, build_grid


@pytest.fixture(scope="module")
def two_bump_run():
    return stepper.run(two_bump_scenario(n_cells=512, n_frames=60))


def _time_interpolated_velocity(traj, convention):
    sc = traj.scenario
    g = sc.grid
    vels = []
    for f in traj.frames:
        dv = elliptic.gradient(f.u, f.v, sc.gamma).values
        vels.append(frame_velocity(f.u.values, dv, g.faces, g.centers, sc.m, sc.q, sc.epsilon, convention))
    times = traj.times

    def vel(t, x):
        k = min(np.searchsorted(times, t, side="right") - 1, len(times) - 2)
        s = (t - times[k]) / (times[k + 1] - times[k])
        return (1 - s) * vels[k](x) + s * vels[k + 1](x)

    return vel


def test_heun_matches_refined_rk4(two_bump_run):
    pair = interface.integrate_interfaces(two_bump_run, -1.0, 1.0)
    vel = _time_interpolated_velocity(two_bump_run, "intro")
    xi = rk4_curve(vel, two_bump_run.times, -1.0)
    Xi = rk4_curve(vel, two_bump_run.times, 1.0)
    assert np.abs(pair.xi - xi).max() < 2e-4
    assert np.abs(pair.Xi - Xi).max() < 2e-4


def test_curves_symmetric_and_ordered(two_bump_run):
    pair = interface.integrate_interfaces(two_bump_run, -1.0, 1.0)
    assert pair.ordered()
    np.testing.assert_allclose(pair.xi, -pair.Xi, atol=1e-12)
    # the hole shrinks: both curves move inwards
    assert pair.xi[-1] > -1.0 and pair.max_speed() > 0


def test_cone_mass_conserved_along_material_curves(two_bump_run):
    pair = interface.integrate_interfaces(two_bump_run, -1.0, 1.0)
    drift = interface.cone_mass_drift(two_bump_run, pair)
    assert drift[0] == 0.0 and drift.max() < 0.01


def test_flipped_convention_breaks_conservation(two_bump_run):
    intro = interface.integrate_interfaces(two_bump_run, -1.0, 1.0, "intro")
    flipped = interface.integrate_interfaces(two_bump_run, -1.0, 1.0, "section4")
    d_intro = interface.cone_mass_drift(two_bump_run, intro).max()
    d_flip = interface.cone_mass_drift(two_bump_run, flipped).max()
    assert d_flip > 10 * d_intro


def test_velocity_sign_conventions_are_opposite(two_bump_run):
    f = two_bump_run.frames[3]
    sc = two_bump_run.scenario
    a = interface.interface_velocity(f, sc, -0.97, "intro")
    b = interface.interface_velocity(f, sc, -0.97, "section4")
    assert a == pytest.approx(-b) and a != 0.0
    with pytest.raises(ValueError):
        interface.interface_velocity(f, sc, -0.97, "other")


def test_vacuum_interior_bounded(two_bump_run):
    pair = interface.integrate_interfaces(two_bump_run, -1.0, 1.0)
    rep = interface.vacuum_check(two_bump_run, pair)
    assert rep.worst <= 2 * two_bump_run.scenario.epsilon
    assert rep.margin == pytest.approx(2 * two_bump_run.grid.dx)
    assert rep.interior_integral[0] == 0.0


def test_cone_mass_index_checked(two_bump_run):
    pair = interface.integrate_interfaces(two_bump_run, -1.0, 1.0)
    with pytest.raises(IndexError):
        interface.cone_mass(two_bump_run, pair, len(two_bump_run.frames))


def test_cone_mass_at_start_is_eps_times_width(two_bump_run):
    pair = interface.integrate_interfaces(two_bump_run, -1.0, 1.0)
    assert interface.cone_mass(two_bump_run, pair, 0) == pytest.approx(0.05 * 2.0, rel=1e-12)


def test_overlap_weights_partial_cells():
    faces = np.array([0.0, 1.0, 2.0, 3.0])
    np.testing.assert_allclose(interface._overlap_weights(faces, 0.5, 2.25), [0.5, 1.0, 0.25])


def test_escape_carries_partial_pair():
    sc = bump_scenario(n_cells=64, t_end=0.01, n_frames=4)
    traj = stepper.run(sc)
    with pytest.raises(interface.InterfaceEscape) as info:
        interface.integrate_interfaces(traj, -3.99, 0.0)
    assert info.value.partial.times.size >= 1


def test_hole_lifetime():
    pair = interface.InterfacePair(np.arange(4.0), np.array([-1, -0.5, 0.1, 0.2]), np.array([1, 0.5, 0.0, 0.1]), -1, 1)
    assert interface.hole_lifetime_index(pair) == 2
    assert interface.hole_lifetime_index(interface.InterfacePair(np.arange(1.0), np.zeros(1), np.ones(1), 0, 1)) == 1


def test_material_curve_of_barenblatt_is_self_similar():
    # for m=2 the particle paths are x(t) = x0 (t/t0)^(1/3)
    sc = bump_scenario(
        n_cells=1024,
        grid=build_grid(-4, 4, 1024),
        u0=InitialData("barenblatt", (1.0, 1.0)),
        epsilon=0.0,
        drift_enabled=False,
        t_end=1.0,
        n_frames=40,
    )
    traj = stepper.run(sc)
    pair = pme.knerr_interface(traj, -0.5, 0.5)
    exact = 0.5 * (1.0 + pair.times) ** (1 / 3)
    assert np.abs(pair.Xi - exact).max() < 2e-3
    assert np.abs(pair.xi + exact).max() < 2e-3


def test_pme_interface_needs_drift_off(two_bump_run):
    with pytest.raises(ValueError):
        pme.knerr_interface(two_bump_run, -1, 1)


def test_vacuum_cone_drift_normalised_by_cell_mass():
    sc = two_bump_scenario(n_cells=256, epsilon=0.0, n_frames=20)
    traj = stepper.run(sc)
    pair = interface.integrate_interfaces(traj, -1.0, 1.0)
    drift = interface.cone_mass_drift(traj, pair)
    # the initial cone holds only a fraction of one edge cell
    assert interface.cone_mass(traj, pair, 0) < sc.grid.dx
    assert drift.max() < 0.05
