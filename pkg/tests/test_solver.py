"""Integrator accuracy, switch handling, and invariance properties."""

import numpy as np
import pytest

import gliomasim as gs
from gliomasim.solver import SimConfig


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(t_end=-1.0)
    with pytest.raises(ValueError):
        SimConfig(t_end=10.0, rel_tol=0.0)
    with pytest.raises(ValueError):
        SimConfig(t_end=10.0, stride=0.0)
    with pytest.raises(ValueError):
        SimConfig(t_end=10.0, smoothing_eps=-1e-3)


def test_agent_relaxation_matches_closed_form(gf):
    # with no cells present both agents relax exponentially:
    #   q(t) = phi/psi + (q0 - phi/psi) exp(-psi t)
    #   y(t) = delta/gamma + (y0 - delta/gamma) exp(-gamma t)
    p, _ = gf
    s0 = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.01])
    traj = gs.integrate(s0, p, SimConfig(t_end=400.0, rel_tol=1e-10, abs_tol=1e-12))
    t = traj.times
    q_exact = p.phi / p.psi + (0.5 - p.phi / p.psi) * np.exp(-p.psi * t)
    y_exact = p.delta / p.gamma + (0.01 - p.delta / p.gamma) * np.exp(-p.gamma * t)
    np.testing.assert_allclose(traj.column("q"), q_exact, atol=1e-8)
    np.testing.assert_allclose(traj.column("y"), y_exact, atol=1e-8)
    np.testing.assert_array_equal(traj.states[:, :5], 0.0)


def test_equilibrium_invariance(gf, e1_report):
    p, _ = gf
    traj = gs.integrate(e1_report.point, p, SimConfig(t_end=1000.0))
    drift = np.abs(traj.states - e1_report.point).max()
    assert drift < 1e-6


def test_resistant_equilibrium_invariance(res, e2_report):
    p, _ = res
    traj = gs.integrate(e2_report.point, p, SimConfig(t_end=1000.0))
    assert np.abs(traj.states - e2_report.point).max() < 1e-6


def test_convergence_order_is_fifth(gf):
    p, state = gf
    # start past the treatment onset so the measured stretch is smooth
    s = gs.integrate(state, p, SimConfig(t_end=100.0)).final_state()
    order = gs.convergence_order(s, p)
    assert 4.5 < order < 6.0


def test_fixed_step_requires_commensurate_horizon(gf):
    p, state = gf
    with pytest.raises(ValueError):
        gs.integrate_fixed(state, p, 10.0, 3.0)


def test_integrate_matches_tight_reference(gf):
    p, state = gf
    loose = gs.integrate(state, p, SimConfig(t_end=500.0))
    tight = gs.integrate(state, p, SimConfig(t_end=500.0,
                                             rel_tol=1e-11, abs_tol=1e-13))
    assert np.abs(loose.states - tight.states).max() < 1e-6


def test_nonnegativity(gf, gf_traj, res_traj):
    for traj in (gf_traj, res_traj):
        assert traj.states.min() >= -1e-9


def test_output_grid_and_metadata(gf):
    p, state = gf
    traj = gs.integrate(state, p, SimConfig(t_end=100.0, stride=2.5))
    assert traj.times[0] == 0.0 and traj.times[-1] == 100.0
    assert np.allclose(np.diff(traj.times), 2.5)
    np.testing.assert_array_equal(traj.states[0], state)
    assert traj.metadata["steps"] > 0
    assert traj.metadata["t_end"] == 100.0


def test_burden_is_sum_of_glioma_columns(gf_traj):
    np.testing.assert_array_equal(
        gf_traj.burden, gf_traj.column("g2") + gf_traj.column("g3"))


def test_switch_events_are_localized(gf):
    # both agents start at zero and turn on immediately; the onset
    # crossing must be detected (they coincide at t = 0, so a single
    # localized event covers both)
    p, state = gf
    traj = gs.integrate(state, p, SimConfig(t_end=50.0))
    assert traj.metadata["switch_events"] >= 1
    # after the onset both agents are strictly positive at every sample
    assert traj.column("q")[1:].min() > 0
    assert traj.column("y")[1:].min() > 0


def test_smoothed_run_tracks_sharp_run(gf):
    p, state = gf
    sharp = gs.integrate(state, p, SimConfig(t_end=200.0))
    smooth = gs.integrate(state, p, SimConfig(t_end=200.0, smoothing_eps=1e-9))
    assert np.abs(sharp.states - smooth.states).max() < 1e-5


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_solver_error_on_overflow(gf):
    # a state far beyond any carrying capacity overflows the quadratic
    # competition terms; the solver must fail loudly, not return garbage
    p, _ = gf
    s = np.array([0.5, 1e200, 0.5, 1.2, 0.9, 0.0, 0.0])
    with pytest.raises(gs.SolverError):
        gs.integrate(s, p, SimConfig(t_end=10.0))


def test_phase_portrait_shapes(gf):
    p, state = gf
    ens = gs.phase_portrait([state, state * 0.5], p, SimConfig(t_end=20.0))
    assert len(ens.trajectories) == 2 and len(ens.labels) == 2
    assert ens.trajectories[0].states.shape == (21, 7)


def test_rejects_invalid_initial_state(gf):
    p, _ = gf
    with pytest.raises(ValueError):
        gs.integrate(np.array([-1, 0, 0, 0, 0, 0, 0.0]), p, SimConfig(t_end=1.0))
