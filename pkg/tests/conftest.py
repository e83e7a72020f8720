"""Shared fixtures: bundled parameter sets and long reference runs."""

import numpy as np
import pytest

import gliomasim as gs


@pytest.fixture(scope="session")
def gf():
    """Baseline (glioma-free scenario) parameters and initial state."""
    p, state = gs.bundled_params("glioma_free")
    return p, np.asarray(state)


@pytest.fixture(scope="session")
def res():
    """Resistant-glioma scenario parameters and initial state."""
    p, state = gs.bundled_params("resistant")
    return p, np.asarray(state)


@pytest.fixture(scope="session")
def gf_traj(gf):
    p, state = gf
    return gs.integrate(state, p, gs.SimConfig(t_end=10000.0))


@pytest.fixture(scope="session")
def res_traj(res):
    p, state = res
    return gs.integrate(state, p, gs.SimConfig(t_end=10000.0))


@pytest.fixture(scope="session")
def e1_report(gf):
    return gs.glioma_free_equilibrium(gf[0])


@pytest.fixture(scope="session")
def e2_report(res):
    return gs.resistant_equilibrium(res[0])
