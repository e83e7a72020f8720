"""Right-hand side of the non-dimensional glioma system.

State vector order (all dimensionless concentrations):

    index 0  g1  glial cells
    index 1  g2  drug-sensitive glioma cells
    index 2  g3  drug-resistant glioma cells
    index 3  g4  endothelial cells
    index 4  g5  neurons
    index 5  q   chemotherapy agent
    index 6  y   anti-angiogenic agent

The seven equations are

    g1' = p1 g1 (1 - g1) - beta1 g1 (g2 + g3) - d1(g4,y) g1 q / (a1 + g1)
    g2' = p2 g2 (1 - S/T) - beta2 g1 g2 - u F(q) g2 - rho F(y) g2
          - d2(g4,y) g2 q / (a2 + g2)
    g3' = p3 g3 (1 - S/T) - beta3 g1 g3 + u F(q) g2 - rho F(y) g3
    g4' = mu S + p4 g4 (1 - g4) - d4 g4 y / (a4 + g4)
    g5' = alpha g1' F(-g1') g5 - d5(g4,y) g5 q / (a5 + g5)
    q'  = phi - [psi + c1 g1/(a1+g1) + c2 g2/(a2+g2) + c5 g5/(a5+g5)] q
    y'  = delta - [gamma + c4 g4/(a4+g4)] y

with S = g2 + g3, T = 1 + tau g4, saturating kill coefficients
d_i(g4,y) = d_i0 + d_i1 g4 + d_i2 y (i = 1, 2, 5), and the Heaviside
switch F (zero branch includes the origin).  The g1' appearing in the
neuron equation is the model right-hand side for g1 evaluated at the
same state -- it is explicitly available, so no difference quotient is
used (the g1 equation does not involve g5, hence no circularity).

All functions here are pure; parameter sets and states are never
mutated and may be shared freely across threads.
"""

from __future__ import annotations

import math

import numpy as np

from .params import NondimParams

#: Component indices, in state-vector order.
G1, G2, G3, G4, G5, Q, Y = range(7)

STATE_NAMES = ("g1", "g2", "g3", "g4", "g5", "q", "y")

_KILL_COEFFS = {
    1: ("d10", "d11", "d12"),
    2: ("d20", "d21", "d22"),
    5: ("d50", "d51", "d52"),
}


def heaviside(x: float) -> float:
    """Unit step with the boundary in the zero branch: 0 for x <= 0, else 1."""
    return 0.0 if x <= 0.0 else 1.0


def smooth_heaviside(x: float, eps: float) -> float:
    """Logistic approximation 1/(1 + exp(-x/eps)); reduces to :func:`heaviside` at eps=0.

    Only used when an integration explicitly opts in to smoothing; the
    model default is the exact switch.
    """
    if eps <= 0.0:
        return heaviside(x)
    # clamp the exponent to avoid overflow far from the switch
    z = x / eps
    if z < -700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(-z))


def kill_rate(i: int, g4: float, y: float, p: NondimParams) -> float:
    """Chemotherapy kill coefficient d_i(g4, y) = d_i0 + d_i1 g4 + d_i2 y.

    Valid for the chemotherapy-targeted compartments i in {1, 2, 5}.
    """
    try:
        k0, k1, k2 = _KILL_COEFFS[i]
    except KeyError:
        raise ValueError(f"kill_rate index must be 1, 2 or 5, got {i}") from None
    return getattr(p, k0) + getattr(p, k1) * g4 + getattr(p, k2) * y


def validate_state(s) -> np.ndarray:
    """Check shape, finiteness and nonnegativity; return a float array copy."""
    arr = np.asarray(s, dtype=float)
    if arr.shape != (7,):
        raise ValueError(f"state must have 7 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("state components must be finite")
    if np.any(arr < 0):
        raise ValueError(f"state components must be >= 0, got {arr}")
    return arr


def rhs(s, p: NondimParams, smoothing_eps: float = 0.0) -> np.ndarray:
    """Time derivative of the seven-component state.

    ``smoothing_eps`` > 0 replaces every Heaviside switch by the logistic
    approximation (integrator robustness escape hatch, off by default).
    """
    g1, g2, g3, g4, g5, q, y = (float(v) for v in s)

    d1 = p.d10 + p.d11 * g4 + p.d12 * y
    d2 = p.d20 + p.d21 * g4 + p.d22 * y
    d5 = p.d50 + p.d51 * g4 + p.d52 * y
    S = g2 + g3
    T = 1.0 + p.tau * g4
    crowd = 1.0 - S / T
    Fq = smooth_heaviside(q, smoothing_eps)
    Fy = smooth_heaviside(y, smoothing_eps)

    dg1 = p.p1 * g1 * (1.0 - g1) - p.beta1 * g1 * S - d1 * g1 * q / (p.a1 + g1)
    dg2 = (p.p2 * g2 * crowd - p.beta2 * g1 * g2 - p.u * Fq * g2 - p.rho * Fy * g2
           - d2 * g2 * q / (p.a2 + g2))
    dg3 = p.p3 * g3 * crowd - p.beta3 * g1 * g3 + p.u * Fq * g2 - p.rho * Fy * g3
    dg4 = p.mu * S + p.p4 * g4 * (1.0 - g4) - p.d4 * g4 * y / (p.a4 + g4)
    dg5 = (p.alpha * dg1 * smooth_heaviside(-dg1, smoothing_eps) * g5
           - d5 * g5 * q / (p.a5 + g5))
    dq = p.phi - (p.psi + p.c1 * g1 / (p.a1 + g1) + p.c2 * g2 / (p.a2 + g2)
                  + p.c5 * g5 / (p.a5 + g5)) * q
    dy = p.delta - (p.gamma + p.c4 * g4 / (p.a4 + g4)) * y

    return np.array((dg1, dg2, dg3, dg4, dg5, dq, dy))


def switching_distances(s, p: NondimParams) -> tuple[float, float, float]:
    """Signed distances to the three Heaviside switching surfaces.

    Returns (q, y, -g1') -- a sign change in any of these flips the
    corresponding switch F(q), F(y), F(-g1').  The third surface only
    matters dynamically when alpha > 0 and g5 > 0.
    """
    dg1 = float(rhs(s, p)[G1])
    return float(s[Q]), float(s[Y]), -dg1
