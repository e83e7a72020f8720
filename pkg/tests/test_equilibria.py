"""Equilibrium solvers against frozen oracle values and the companion-matrix oracle."""

import numpy as np
import pytest

import gliomasim as gs
from gliomasim.equilibria import (
    CubicCoefficients,
    cardano_cubic_roots,
    polynomial_root_oracle,
    positive_quadratic_root,
    resistant_cubic_coefficients,
)

# Frozen from an independent root-finder run (companion-matrix solve of
# the reduced system followed by full-system verification).
E1_ORACLE = np.array([0.99999903, 0.0, 0.0, 0.65331627, 0.0, 0.1810203, 0.00161459])
E2_ORACLE = {"g3": 0.61541606, "g4": 1.53888081, "q": 0.22062879, "y": 0.0018662}


def _multisets_close(got, want, rtol):
    """Greedy nearest-neighbour matching of two root multisets."""
    pool = list(want)
    scale = max(1.0, max(abs(z) for z in pool))
    for g in got:
        best = min(pool, key=lambda w: abs(w - g))
        if abs(best - g) > rtol * scale:
            return False
        pool.remove(best)
    return not pool


def test_trivial_equilibrium_closed_form(gf):
    p, _ = gf
    rep = gs.trivial_equilibrium(p)
    assert rep.exists and rep.kind == "trivial"
    np.testing.assert_allclose(rep.point[:5], 0.0)
    assert rep.point[5] == pytest.approx(p.phi / p.psi, rel=1e-15)
    assert rep.point[6] == pytest.approx(p.delta / p.gamma, rel=1e-15)
    assert rep.residual < 1e-15


def test_glioma_free_equilibrium_frozen_oracle(gf, e1_report):
    rep = e1_report
    assert rep.exists and rep.kind == "glioma_free"
    np.testing.assert_allclose(rep.point, E1_ORACLE, atol=5e-9)
    assert rep.residual < 1e-12


def test_glioma_free_point_zeroes_rhs(gf, e1_report):
    p, _ = gf
    np.testing.assert_allclose(gs.rhs(e1_report.point, p), 0.0, atol=1e-12)


def test_resistant_equilibrium_frozen_oracle(res, e2_report):
    rep = e2_report
    assert rep.exists and rep.kind == "resistant"
    assert rep.point[2] == pytest.approx(E2_ORACLE["g3"], abs=1e-7)
    assert rep.point[3] == pytest.approx(E2_ORACLE["g4"], abs=1e-7)
    assert rep.point[5] == pytest.approx(E2_ORACLE["q"], abs=1e-7)
    assert rep.point[6] == pytest.approx(E2_ORACLE["y"], abs=1e-7)
    assert rep.point[[0, 1, 4]].max() == 0.0
    assert rep.residual < 1e-12


def test_resistant_chemo_level_is_exact_balance(res, e2_report):
    p, _ = res
    # with no glial, sensitive, or neuron uptake the chemo agent balances
    # infusion against clearance exactly
    assert e2_report.point[5] == p.phi / p.psi


def test_resistant_point_zeroes_rhs(res, e2_report):
    p, _ = res
    np.testing.assert_allclose(gs.rhs(e2_report.point, p), 0.0, atol=1e-12)


def test_resistant_g3_matches_cap_formula(res, e2_report):
    p, _ = res
    g4 = e2_report.point[3]
    assert e2_report.point[2] == pytest.approx(
        gs.resistant_burden_cap(g4, p), rel=1e-10)


def test_resistant_nonexistent_when_dormancy_dominates(res):
    p, _ = res
    rep = gs.resistant_equilibrium(p.replace(rho=2 * p.p3))
    assert not rep.exists
    assert not rep.existence_flags["g3_positive"]


def test_positive_quadratic_root_against_oracle():
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(300):
        a = rng.uniform(0.1, 2)
        b, c = rng.uniform(-2, 2, size=2)
        root = positive_quadratic_root(a, b, c)
        oracle = polynomial_root_oracle([a, b, c])
        real_pos = sorted(r.real for r in oracle
                          if abs(r.imag) < 1e-12 and r.real > 0)
        if root is None:
            assert not real_pos or max(real_pos) <= 0
        else:
            checked += 1
            assert root == pytest.approx(max(real_pos), rel=1e-10)
    assert checked > 50  # the draw actually exercised the positive branch


def test_cardano_roots_against_companion_oracle():
    rng = np.random.default_rng(23)
    for _ in range(1000):
        l2, l3, l4 = rng.uniform(-2, 2, size=3)
        roots = cardano_cubic_roots(CubicCoefficients(1.0, l2, l3, l4))
        oracle = polynomial_root_oracle([1.0, l2, l3, l4])
        assert _multisets_close(roots, oracle, 1e-10)


def test_cardano_residuals_are_tiny():
    rng = np.random.default_rng(5)
    for _ in range(200):
        l2, l3, l4 = rng.uniform(-3, 3, size=3)
        for r in cardano_cubic_roots(CubicCoefficients(1.0, l2, l3, l4)):
            assert abs(((r + l2) * r + l3) * r + l4) < 1e-10


def test_cubic_coefficients_require_monic():
    with pytest.raises(ValueError):
        CubicCoefficients(2.0, 0.0, 0.0, 0.0)


def test_resistant_cubic_consistency(res, e2_report):
    # the persistent endothelial level must be a root of the reduced cubic
    p, _ = res
    g4, y = e2_report.point[3], e2_report.point[6]
    c = resistant_cubic_coefficients(p, y)
    val = ((g4 + c.l2) * g4 + c.l3) * g4 + c.l4
    assert abs(val) < 1e-10


def test_polynomial_root_oracle_validates():
    with pytest.raises(ValueError):
        polynomial_root_oracle([0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        polynomial_root_oracle([1.0] * 6)  # degree too high


def test_report_serialization(e1_report):
    doc = e1_report.to_dict()
    assert doc["kind"] == "glioma_free"
    assert len(doc["point"]) == 7
    assert doc["residual"] < 1e-12
