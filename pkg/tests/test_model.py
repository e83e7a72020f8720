"""Right-hand side of the model: independently recomputed oracle values."""

import numpy as np
import pytest

import gliomasim as gs
from gliomasim import model
from gliomasim.model import G1, G2, G3, G4, G5, Q, Y


def test_heaviside_convention():
    assert model.heaviside(-1.0) == 0.0
    assert model.heaviside(0.0) == 0.0  # zero branch is off
    assert model.heaviside(1e-300) == 1.0


def test_smooth_heaviside_limits():
    assert model.smooth_heaviside(-1.0, 1e-3) == pytest.approx(0.0, abs=1e-12)
    assert model.smooth_heaviside(1.0, 1e-3) == pytest.approx(1.0, abs=1e-12)
    assert model.smooth_heaviside(0.0, 1e-3) == 0.5
    # no overflow even for huge arguments
    assert model.smooth_heaviside(-1e6, 1e-12) == 0.0


def test_kill_rate_composition(gf):
    p, _ = gf
    assert model.kill_rate(1, 0.0, 0.0, p) == p.d10
    assert model.kill_rate(2, 2.0, 3.0, p) == pytest.approx(
        p.d20 + 2.0 * p.d21 + 3.0 * p.d22)
    assert model.kill_rate(5, 1.0, 1.0, p) == pytest.approx(
        p.d50 + p.d51 + p.d52)
    with pytest.raises(ValueError):
        model.kill_rate(3, 0.0, 0.0, p)


def _rhs_by_hand(s, p):
    """Term-by-term independent recomputation of the model equations."""
    g1, g2, g3, g4, g5, q, y = s
    d1 = p.d10 + p.d11 * g4 + p.d12 * y
    d2 = p.d20 + p.d21 * g4 + p.d22 * y
    d5 = p.d50 + p.d51 * g4 + p.d52 * y
    Fq = 1.0 if q > 0 else 0.0
    Fy = 1.0 if y > 0 else 0.0
    T = 1.0 + p.tau * g4
    dg1 = p.p1 * g1 * (1 - g1) - p.beta1 * g1 * (g2 + g3) - d1 * g1 * q / (p.a1 + g1)
    dg2 = (p.p2 * g2 * (1 - (g2 + g3) / T) - p.beta2 * g1 * g2
           - p.u * Fq * g2 - p.rho * Fy * g2 - d2 * g2 * q / (p.a2 + g2))
    dg3 = (p.p3 * g3 * (1 - (g2 + g3) / T) - p.beta3 * g1 * g3
           + p.u * Fq * g2 - p.rho * Fy * g3)
    dg4 = p.mu * (g2 + g3) + p.p4 * g4 * (1 - g4) - p.d4 * g4 * y / (p.a4 + g4)
    Fn = 1.0 if -dg1 > 0 else 0.0
    dg5 = p.alpha * dg1 * Fn * g5 - d5 * g5 * q / (p.a5 + g5)
    dq = p.phi - (p.psi + p.c1 * g1 / (p.a1 + g1) + p.c2 * g2 / (p.a2 + g2)
                  + p.c5 * g5 / (p.a5 + g5)) * q
    dy = p.delta - (p.gamma + p.c4 * g4 / (p.a4 + g4)) * y
    return np.array([dg1, dg2, dg3, dg4, dg5, dq, dy])


def test_rhs_matches_independent_recomputation(gf):
    p, _ = gf
    rng = np.random.default_rng(7)
    for _ in range(50):
        s = rng.uniform(0.01, 1.5, size=7)
        np.testing.assert_allclose(gs.rhs(s, p), _rhs_by_hand(s, p),
                                   rtol=1e-14, atol=1e-16)


def test_rhs_frozen_oracle_point(gf):
    # value frozen from the hand recomputation at a fixed state
    p, _ = gf
    s = np.array([0.5, 0.05, 0.5, 1.2, 0.9, 0.1, 0.001])
    np.testing.assert_allclose(gs.rhs(s, p), _rhs_by_hand(s, p), rtol=1e-14)
    # spot value: glial equation at this state
    want = (p.p1 * 0.25 - p.beta1 * 0.5 * 0.55
            - (p.d10 + p.d11 * 1.2 + p.d12 * 0.001) * 0.5 * 0.1 / 1.5)
    assert gs.rhs(s, p)[G1] == pytest.approx(want, rel=1e-14)


def test_switch_terms_off_at_zero_agents(gf):
    p, _ = gf
    s = np.array([0.5, 0.1, 0.1, 0.5, 0.9, 0.0, 0.0])
    ds = gs.rhs(s, p)
    # with q = y = 0 no mutation or dormancy flux: resistant growth is
    # purely logistic/competitive
    T = 1 + p.tau * 0.5
    want3 = p.p3 * 0.1 * (1 - 0.2 / T) - p.beta3 * 0.5 * 0.1
    assert ds[G3] == pytest.approx(want3, rel=1e-14)
    assert ds[Q] == pytest.approx(p.phi)
    assert ds[Y] == pytest.approx(p.delta)


def test_neuron_loss_only_under_glial_decline(gf):
    p, _ = gf
    # huge glioma load makes g1' < 0 -> neuron loss active
    s_decline = np.array([0.5, 1.0, 1.0, 0.5, 0.9, 0.0, 0.0])
    dg1 = gs.rhs(s_decline, p)[G1]
    assert dg1 < 0
    assert gs.rhs(s_decline, p)[G5] == pytest.approx(p.alpha * dg1 * 0.9)
    # healthy regrowth -> no neuron term at all (q = 0 kills the other term)
    s_growth = np.array([0.5, 0.0, 0.0, 0.5, 0.9, 0.0, 0.0])
    assert gs.rhs(s_growth, p)[G1] > 0
    assert gs.rhs(s_growth, p)[G5] == 0.0


def test_validate_state_rejects_bad_shapes(gf):
    with pytest.raises(ValueError):
        model.validate_state(np.zeros(6))
    with pytest.raises(ValueError):
        model.validate_state(np.array([1, 2, 3, 4, 5, 6, np.nan]))
    with pytest.raises(ValueError):
        model.validate_state(np.array([-0.1, 0, 0, 0, 0, 0, 0]))


def test_switching_distances(gf):
    p, _ = gf
    s = np.array([0.5, 0.05, 0.5, 1.2, 0.9, 0.3, 0.002])
    dq, dy, dneg = model.switching_distances(s, p)
    assert dq == 0.3 and dy == 0.002
    assert dneg == pytest.approx(-gs.rhs(s, p)[G1])


def test_smoothing_approaches_sharp_rhs(gf):
    p, _ = gf
    s = np.array([0.5, 0.05, 0.5, 1.2, 0.9, 0.3, 0.002])
    sharp = gs.rhs(s, p)
    smooth = gs.rhs(s, p, smoothing_eps=1e-6)
    np.testing.assert_allclose(smooth, sharp, rtol=1e-9, atol=1e-12)
