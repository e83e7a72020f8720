"""Local stability analysis: Jacobian, spectrum, classification.

The Jacobian is assembled from analytic partial derivatives of the model
RHS.  Heaviside switches are differentiated as locally constant (their
derivative vanishes almost everywhere); states lying exactly on a
switching surface where the one-sided derivatives differ are flagged
with :class:`NonSmoothPointWarning` and evaluated with the zero-branch
convention F(0) = 0.

The neuron equation contains the g1 derivative itself; when the
glial-decline switch is active (g1' < 0) the chain rule propagates the
g1 row into the g5 row, and when it is inactive the whole term
contributes nothing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import model
from .model import G1, G2, G3, G4, G5, Q, Y
from .equilibria import EquilibriumReport
from .params import NondimParams

#: Real parts within this of zero count as marginal (double-precision floor).
EPS_MARGINAL = 1e-12
#: Imaginary parts above this make a stable spectrum a spiral.
EPS_IMAG = 1e-9

STABLE_NODE = "StableNode"
STABLE_SPIRAL = "StableSpiral"
SADDLE = "Saddle"
UNSTABLE = "Unstable"
MARGINAL = "Marginal"


class NonSmoothPointWarning(UserWarning):
    """State lies exactly on a Heaviside switching surface."""


class EigenvalueError(RuntimeError):
    """Eigenvalue iteration failed."""


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray  # 7 complex values sorted by real part
    classification: str
    theorem_flags: dict[str, bool]
    matrix: np.ndarray

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(l.real), float(l.imag)] for l in self.eigenvalues],
            "classification": self.classification,
            "theorem_flags": dict(self.theorem_flags),
            "matrix": [[float(v) for v in row] for row in self.matrix],
        }

    def matrix_csv(self) -> str:
        """Row-major CSV rendering of the Jacobian."""
        return "\n".join(",".join(repr(float(v)) for v in row) for row in self.matrix) + "\n"


def _check_switching_surfaces(s, p: NondimParams) -> None:
    q_dist, y_dist, neg_dg1 = model.switching_distances(s, p)
    msgs = []
    if q_dist == 0.0 and (p.u > 0 and s[G2] > 0):
        msgs.append("q = 0 with an active mutation term")
    if y_dist == 0.0 and (p.rho > 0 and (s[G2] > 0 or s[G3] > 0)):
        msgs.append("y = 0 with an active dormancy term")
    if neg_dg1 == 0.0 and p.alpha > 0 and s[G5] > 0:
        msgs.append("g1' = 0 with an active neuron-loss term")
    if msgs:
        warnings.warn(
            "state lies on a switching surface (" + "; ".join(msgs)
            + "); proceeding with the zero-branch convention",
            NonSmoothPointWarning,
            stacklevel=3,
        )


def jacobian(s, p: NondimParams, warn_nonsmooth: bool = True) -> np.ndarray:
    """Analytic 7x7 Jacobian of the model RHS at state ``s``.

    Row/column order is (g1, g2, g3, g4, g5, q, y).  Switch values are
    frozen at their local Heaviside value.
    """
    if warn_nonsmooth:
        _check_switching_surfaces(s, p)
    g1, g2, g3, g4, g5, q, y = (float(v) for v in s)

    d1 = p.d10 + p.d11 * g4 + p.d12 * y
    d2 = p.d20 + p.d21 * g4 + p.d22 * y
    d5 = p.d50 + p.d51 * g4 + p.d52 * y
    S = g2 + g3
    T = 1.0 + p.tau * g4
    Fq = model.heaviside(q)
    Fy = model.heaviside(y)

    h1 = p.a1 + g1
    h2 = p.a2 + g2
    h4 = p.a4 + g4
    h5 = p.a5 + g5

    J = np.zeros((7, 7))

    # glial row
    J[G1, G1] = p.p1 * (1.0 - 2.0 * g1) - p.beta1 * S - d1 * q * p.a1 / h1 ** 2
    J[G1, G2] = -p.beta1 * g1
    J[G1, G3] = -p.beta1 * g1
    J[G1, G4] = -p.d11 * g1 * q / h1
    J[G1, Q] = -d1 * g1 / h1
    J[G1, Y] = -p.d12 * g1 * q / h1

    # sensitive glioma row
    J[G2, G1] = -p.beta2 * g2
    J[G2, G2] = (p.p2 * (1.0 - S / T) - p.p2 * g2 / T - p.beta2 * g1
                 - p.u * Fq - p.rho * Fy - d2 * q * p.a2 / h2 ** 2)
    J[G2, G3] = -p.p2 * g2 / T
    J[G2, G4] = p.p2 * g2 * S * p.tau / T ** 2 - p.d21 * g2 * q / h2
    J[G2, Q] = -d2 * g2 / h2
    J[G2, Y] = -p.d22 * g2 * q / h2

    # resistant glioma row
    J[G3, G1] = -p.beta3 * g3
    J[G3, G2] = -p.p3 * g3 / T + p.u * Fq
    J[G3, G3] = p.p3 * (1.0 - S / T) - p.p3 * g3 / T - p.beta3 * g1 - p.rho * Fy
    J[G3, G4] = p.p3 * g3 * S * p.tau / T ** 2

    # endothelial row
    J[G4, G2] = p.mu
    J[G4, G3] = p.mu
    J[G4, G4] = p.p4 * (1.0 - 2.0 * g4) - p.d4 * y * p.a4 / h4 ** 2
    J[G4, Y] = -p.d4 * g4 / h4

    # neuron row: alpha * g1' * F(-g1') * g5 - d5 g5 q / (a5 + g5)
    dg1 = float(model.rhs(s, p)[G1])
    Fn = model.heaviside(-dg1)
    if Fn > 0.0:
        J[G5, :] += p.alpha * g5 * Fn * J[G1, :]
    J[G5, G4] += -p.d51 * g5 * q / h5
    J[G5, G5] += p.alpha * dg1 * Fn - d5 * q * p.a5 / h5 ** 2
    J[G5, Q] += -d5 * g5 / h5
    J[G5, Y] += -p.d52 * g5 * q / h5

    # chemotherapy agent row
    J[Q, G1] = -p.c1 * q * p.a1 / h1 ** 2
    J[Q, G2] = -p.c2 * q * p.a2 / h2 ** 2
    J[Q, G5] = -p.c5 * q * p.a5 / h5 ** 2
    J[Q, Q] = -(p.psi + p.c1 * g1 / h1 + p.c2 * g2 / h2 + p.c5 * g5 / h5)

    # anti-angiogenic agent row
    J[Y, G4] = -p.c4 * y * p.a4 / h4 ** 2
    J[Y, Y] = -(p.gamma + p.c4 * g4 / h4)

    return J


def eigenvalues(m: np.ndarray) -> np.ndarray:
    """Spectrum of a real 7x7 matrix, sorted by real part.

    Conjugate pairs are symmetrized to exact conjugates; a LAPACK
    convergence failure raises instead of returning a partial spectrum.
    """
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    try:
        ev = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigenvalueError(str(exc)) from exc
    # LAPACK on a real matrix already returns conjugate pairs, but make
    # the pairing exact: sort, then pair adjacent conjugates.
    ev = np.sort_complex(ev)
    out = ev.copy()
    i = 0
    while i < len(ev) - 1:
        a, b = ev[i], ev[i + 1]
        if a.imag != 0 and abs(a - b.conjugate()) <= 1e-12 * max(1.0, abs(a)):
            re = 0.5 * (a.real + b.real)
            im = 0.5 * (abs(a.imag) + abs(b.imag))
            out[i] = complex(re, -im)
            out[i + 1] = complex(re, im)
            i += 2
        else:
            i += 1
    return out[np.argsort(out.real)]


def classify(eigs, eps_marginal: float = EPS_MARGINAL, eps_imag: float = EPS_IMAG) -> str:
    """Classify a 7-eigenvalue spectrum.

    StableNode: every real part < -eps with no imaginary part above the
    spiral threshold; StableSpiral: likewise but with an oscillatory
    pair; Unstable: every real part > eps; Saddle: real parts of both
    signs beyond +-eps; Marginal: any real part pinned inside the eps
    band.
    """
    eigs = np.asarray(eigs, dtype=complex)
    re = eigs.real
    has_imag = bool(np.any(np.abs(eigs.imag) > eps_imag))
    if np.all(re < -eps_marginal):
        return STABLE_SPIRAL if has_imag else STABLE_NODE
    if np.any(np.abs(re) <= eps_marginal):
        return MARGINAL
    if np.all(re > eps_marginal):
        return UNSTABLE
    if np.any(re > eps_marginal) and np.any(re < -eps_marginal):
        return SADDLE
    return MARGINAL


def stability_report(s, p: NondimParams, theorem_flags: dict | None = None) -> StabilityReport:
    """Jacobian + spectrum + classification at a state."""
    J = jacobian(s, p, warn_nonsmooth=False)
    ev = eigenvalues(J)
    return StabilityReport(
        eigenvalues=ev,
        classification=classify(ev),
        theorem_flags=theorem_flags or {},
        matrix=J,
    )


def trivial_eigenvalues(p: NondimParams) -> np.ndarray:
    """Closed-form spectrum at the trivial equilibrium.

    The variational matrix there is block-triangular, so the eigenvalues
    read off the diagonal:

        l1 = p1 - (d12 delta/gamma + d10) phi / (psi a1)
        l2 = p2 - u - rho - (d22 delta/gamma + d20) phi / (psi a2)
        l3 = p3 - rho
        l4 = p4 - d4 delta / (gamma a4)
        l5 = -(d52 delta/gamma + d50) phi / (psi a5)
        l6 = -psi
        l7 = -gamma
    """
    q0 = p.phi / p.psi
    y0 = p.delta / p.gamma
    return np.array([
        p.p1 - (p.d12 * y0 + p.d10) * q0 / p.a1,
        p.p2 - p.u - p.rho - (p.d22 * y0 + p.d20) * q0 / p.a2,
        p.p3 - p.rho,
        p.p4 - p.d4 * y0 / p.a4,
        -(p.d52 * y0 + p.d50) * q0 / p.a5,
        -p.psi,
        -p.gamma,
    ])


def theorem1_conditions(p: NondimParams) -> dict:
    """Trivial-equilibrium stability conditions and closed-form eigenvalues.

    Returns the four threshold inequalities in their conventional form
    plus the eigenvalue list they are derived from.  Conditions 1 and 2
    are also evaluated directly from the eigenvalue signs (the
    conventional inequalities carry a stray clearance factor; both forms
    are reported under distinct keys).
    """
    lam = trivial_eigenvalues(p)
    printed = {
        "cond1_phi_vs_glial": p.phi > p.p1 * p.psi * p.a1 * p.gamma / (p.d10 + p.d12 * p.delta),
        "cond2_phi_vs_sensitive": (
            p.phi > (p.p2 - p.u - p.rho) * p.psi * p.a2 * p.gamma / (p.d20 + p.d22 * p.delta)
        ),
        "cond3_rho_vs_p3": p.rho > p.p3,
        "cond4_delta_vs_p4": p.delta > p.p4 * p.gamma * p.a4 / p.d4,
    }
    eig_signs = {
        "lambda1_negative": lam[0] < 0,
        "lambda2_negative": lam[1] < 0,
        "lambda3_negative": lam[2] < 0,
        "lambda4_negative": lam[3] < 0,
    }
    return {**printed, **eig_signs, "eigenvalues": lam}


def theorem2_conditions(p: NondimParams, e1: EquilibriumReport) -> dict:
    """Glioma-free equilibrium stability conditions.

    Evaluates the four threshold inequalities at the refined point plus
    the 2x2-block quantities v1, v2 (endothelial/anti-angiogenic block)
    and w1, w2 (glial/chemotherapy block) with their sign checks.  Two
    statements of the third condition circulate that differ by the sign
    of the dormancy rate; both variants are reported under distinct
    names ("printed" is the weaker form, "eigen" the one matching the
    resistant-direction eigenvalue).
    """
    if e1.kind != "glioma_free" or not e1.exists:
        raise ValueError("theorem2_conditions requires a valid glioma-free report")
    g1, _, _, g4, _, q, y = (float(v) for v in e1.point)
    d1 = model.kill_rate(1, g4, y, p)
    d2 = model.kill_rate(2, g4, y, p)
    h1 = p.a1 + g1
    h4 = p.a4 + g4

    cond1 = (
        2.0 * p.p4 * g4 * p.gamma
        + 2.0 * p.p4 * g4 ** 2 * p.c4 / h4
        + p.d4 * y * p.a4 * p.gamma / h4 ** 2
        > p.p4 * p.gamma + p.p4 * p.c4 * g4 / h4
    )
    cond2 = d2 * q > (p.p2 - p.beta2 * g1 - p.u - p.rho) * p.a2
    cond3_printed = p.p3 < p.beta3 * g1 - p.rho
    cond3_eigen = p.p3 < p.beta3 * g1 + p.rho
    lead = p.a1 * q * (p.a1 * p.psi + p.c1 * g1 + g1 * p.psi) / h1 ** 3
    cond4 = (
        2.0 * p.psi * p.p1 * g1
        + 2.0 * p.c1 * g1 ** 2 * p.p1 / h1
        + lead * (p.d11 * g4 + p.d12 * y + p.d10)
        > p.psi * p.p1 + p.c1 * g1 * p.p1 / h1
    )

    J = jacobian(e1.point, p, warn_nonsmooth=False)
    v1 = J[Y, Y] + J[G4, G4]
    v2 = J[Y, Y] * J[G4, G4] - J[Y, G4] * J[G4, Y]
    w1 = J[Q, Q] + J[G1, G1]
    w2 = J[Q, Q] * J[G1, G1] - J[G1, Q] * J[Q, G1]

    return {
        "cond1_endothelial_block": cond1,
        "cond2_sensitive_decay": cond2,
        "cond3_resistant_decay_printed": cond3_printed,
        "cond3_resistant_decay_eigen": cond3_eigen,
        "cond4_glial_block": cond4,
        "v1": float(v1), "v2": float(v2),
        "v1_negative": v1 < 0, "v2_positive": v2 > 0,
        "w1": float(w1), "w2": float(w2),
        "w1_negative": w1 < 0, "w2_positive": w2 > 0,
        "kill_rate_d1": float(d1),
    }


def critical_chemo_infusion(
    p: NondimParams,
    phi_range: tuple[float, float] = (1e-6, 1e6),
    tol: float = 1e-12,
) -> float | None:
    """Chemo infusion threshold above which the trivial equilibrium stabilizes.

    Only the glial and sensitive-glioma eigenvalues depend on the chemo
    infusion rate; bisection locates the phi at which both turn
    negative.  Returns None when a phi-independent eigenvalue (resistant
    or endothelial direction) is already nonnegative -- no infusion rate
    stabilizes the cell-free state then -- or when the bracket does not
    contain the threshold.
    """
    lo, hi = phi_range
    if not (0 < lo < hi) or not math.isfinite(hi):
        raise ValueError("phi_range must be a bounded positive interval")
    lam = trivial_eigenvalues(p)
    if lam[2] >= 0 or lam[3] >= 0:
        return None

    def worst(phi: float) -> float:
        q0 = phi / p.psi
        y0 = p.delta / p.gamma
        l1 = p.p1 - (p.d12 * y0 + p.d10) * q0 / p.a1
        l2 = p.p2 - p.u - p.rho - (p.d22 * y0 + p.d20) * q0 / p.a2
        return max(l1, l2)

    flo, fhi = worst(lo), worst(hi)
    if flo <= 0 or fhi >= 0:
        return None
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if worst(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
