"""Equilibrium families of the glioma system.

Three families exist:

* ``trivial`` -- all cells extinct, agents at their infusion/clearance
  balance (phi/psi, delta/gamma).
* ``glioma_free`` -- glial and endothelial cells survive, no glioma
  (g2 = g3 = g5 = 0).  Closed-form chain: a quadratic for g4, the agent
  balance for y, a quadratic for g1 and the glial balance for q, then a
  damped Newton polish on the reduced 4-variable system.
* ``resistant`` -- only resistant glioma and endothelial cells persist
  (g1 = g2 = g5 = 0).  q = phi/psi exactly; g4 solves a cubic whose
  constant-y form is closed under Cardano, but whose y-coefficient
  itself depends on g4, so the canonical solve here substitutes
  y(g4) and finds the root of the resulting scalar equation by
  bracketing; g3 then follows from the dormancy/proliferation balance.

Each solve returns an :class:`EquilibriumReport` carrying the point, the
existence-condition booleans, and the full-state RHS residual.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import model
from .params import NondimParams

#: Any report with residual above this is not marked valid.
RESIDUAL_TOL = 1e-8
#: Newton convergence target for refined closed-form chains.
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 100
#: Bracketing domain for the resistant endothelial concentration.
G4_BRACKET_MAX = 10.0

KIND_TRIVIAL = "trivial"
KIND_GLIOMA_FREE = "glioma_free"
KIND_RESISTANT = "resistant"

METHOD_CLOSED_FORM = "closed_form"
METHOD_NEWTON_REFINED = "newton_refined"


class EquilibriumError(RuntimeError):
    """Raised when an equilibrium solve fails to converge."""


@dataclass(frozen=True)
class EquilibriumReport:
    kind: str
    point: np.ndarray
    existence_flags: dict[str, bool]
    residual: float
    method: str
    exists: bool = True
    diagnostics: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.exists and self.residual < RESIDUAL_TOL

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "point": [float(v) for v in self.point],
            "existence_flags": dict(self.existence_flags),
            "residual": float(self.residual),
            "method": self.method,
            "exists": self.exists,
            "valid": self.valid,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class CubicCoefficients:
    """Monic cubic l1 x^3 + l2 x^2 + l3 x + l4 with l1 fixed to 1."""

    l1: float
    l2: float
    l3: float
    l4: float

    def __post_init__(self) -> None:
        if self.l1 != 1.0:
            raise ValueError(f"cubic must be monic (l1 = 1), got l1 = {self.l1}")


def _residual(point: np.ndarray, p: NondimParams) -> float:
    return float(np.max(np.abs(model.rhs(point, p))))


def trivial_equilibrium(p: NondimParams) -> EquilibriumReport:
    """All-cells-extinct equilibrium (0,0,0,0,0, phi/psi, delta/gamma)."""
    point = np.array([0.0, 0.0, 0.0, 0.0, 0.0, p.phi / p.psi, p.delta / p.gamma])
    return EquilibriumReport(
        kind=KIND_TRIVIAL,
        point=point,
        existence_flags={"psi_positive": p.psi > 0, "gamma_positive": p.gamma > 0},
        residual=_residual(point, p),
        method=METHOD_CLOSED_FORM,
    )


def positive_quadratic_root(a2c: float, b: float, c: float) -> float | None:
    """Larger root of a2c x^2 + b x + c when it is real and positive, else None."""
    if a2c <= 0:
        raise ValueError(f"leading coefficient must be > 0, got {a2c}")
    disc = b * b - 4.0 * a2c * c
    if disc < 0:
        return None
    root = (-b + math.sqrt(disc)) / (2.0 * a2c)
    return root if root > 0 else None


def _g4_quadratic_coeffs(p: NondimParams) -> tuple[float, float, float]:
    """Quadratic for the glioma-free endothelial coordinate."""
    return (
        p.p4 * (p.c4 + p.gamma),
        p.p4 * ((p.a4 - 1.0) * p.gamma - p.c4),
        -p.a4 * p.gamma * p.p4 + p.delta * p.d4,
    )


def _g1_quadratic_coeffs(p: NondimParams, d1: float) -> tuple[float, float, float]:
    """Quadratic for the glioma-free glial coordinate, given d1(g4, y)."""
    return (
        p.p1 * (p.c1 + p.psi),
        ((p.a1 - 1.0) * p.psi - p.c1) * p.p1,
        -p.a1 * p.p1 * p.psi + p.phi * d1,
    )


def _agent_y(g4: float, p: NondimParams) -> float:
    """Anti-angiogenic balance y(g4) = delta (a4 + g4) / ((c4+gamma) g4 + a4 gamma)."""
    return p.delta * (p.a4 + g4) / ((p.c4 + p.gamma) * g4 + p.a4 * p.gamma)


def _newton_refine_reduced(point: np.ndarray, free: list[int], p: NondimParams) -> np.ndarray:
    """Damped Newton on the RHS components of the free coordinates.

    The remaining coordinates stay pinned at their (exact) values.  Uses
    the analytic Jacobian restricted to the free block.
    """
    from .stability import jacobian  # local import to avoid a module cycle

    s = point.copy()
    res = model.rhs(s, p)[free]
    norm = float(np.max(np.abs(res)))
    for _ in range(NEWTON_MAX_ITER):
        if norm < NEWTON_TOL:
            return s
        J = jacobian(s, p, warn_nonsmooth=False)[np.ix_(free, free)]
        try:
            step = np.linalg.solve(J, res)
        except np.linalg.LinAlgError as exc:
            raise EquilibriumError(f"singular reduced Jacobian, residual {norm:.3e}") from exc
        lam = 1.0
        while lam >= 1.0 / 1024.0:
            trial = s.copy()
            trial[free] = s[free] - lam * step
            trial_res = model.rhs(trial, p)[free]
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm < norm:
                s, res, norm = trial, trial_res, trial_norm
                break
            lam *= 0.5
        else:
            # no decrease at any damping; accept the full step once
            s[free] = s[free] - step
            res = model.rhs(s, p)[free]
            norm = float(np.max(np.abs(res)))
    if norm < NEWTON_TOL:
        return s
    raise EquilibriumError(
        f"Newton refinement did not converge in {NEWTON_MAX_ITER} iterations; "
        f"last residual {norm:.3e}"
    )


def glioma_free_equilibrium(p: NondimParams) -> EquilibriumReport:
    """Glioma-free survivor equilibrium (g1, 0, 0, g4, 0, q, y).

    The closed-form chain (g4 quadratic -> y balance -> g1 quadratic ->
    q balance) is only self-consistent at the exact fixed point, so the
    result is polished by damped Newton on the reduced (g1, g4, q, y)
    system until the residual drops below ``NEWTON_TOL``.
    """
    qa, qb, qc = _g4_quadratic_coeffs(p)
    g4 = positive_quadratic_root(qa, qb, qc)
    flags = {
        "g4_branch": p.delta * p.d4 < p.a4 * p.gamma * p.p4,
    }
    if g4 is None:
        flags["q_branch"] = False
        return EquilibriumReport(
            kind=KIND_GLIOMA_FREE,
            point=np.zeros(7),
            existence_flags=flags,
            residual=math.inf,
            method=METHOD_CLOSED_FORM,
            exists=False,
            diagnostics={"reason": "no positive root for the g4 quadratic"},
        )
    y = _agent_y(g4, p)
    d1 = model.kill_rate(1, g4, y, p)
    flags["q_branch"] = p.phi / p.psi < p.p1 * p.a1 / d1
    ga, gb, gc = _g1_quadratic_coeffs(p, d1)
    g1 = positive_quadratic_root(ga, gb, gc)
    if g1 is None:
        return EquilibriumReport(
            kind=KIND_GLIOMA_FREE,
            point=np.zeros(7),
            existence_flags=flags,
            residual=math.inf,
            method=METHOD_CLOSED_FORM,
            exists=False,
            diagnostics={"reason": "no positive root for the g1 quadratic"},
        )
    q = p.p1 * (1.0 - g1) * (p.a1 + g1) / d1
    seed = np.array([g1, 0.0, 0.0, g4, 0.0, q, y])
    point = _newton_refine_reduced(seed, [model.G1, model.G4, model.Q, model.Y], p)
    return EquilibriumReport(
        kind=KIND_GLIOMA_FREE,
        point=point,
        existence_flags=flags,
        residual=_residual(point, p),
        method=METHOD_NEWTON_REFINED,
        diagnostics={"closed_form_seed": [float(v) for v in seed]},
    )


def cardano_cubic_roots(c: CubicCoefficients) -> tuple[complex, complex, complex]:
    """All three roots of the monic cubic, via the depressed substitution.

    With t = x + l2/3 the cubic becomes t^3 + pt + q; three real roots
    are produced trigonometrically, otherwise by Cardano's radical.
    """
    l2, l3, l4 = c.l2, c.l3, c.l4
    shift = l2 / 3.0
    pp = l3 - l2 * l2 / 3.0
    qq = 2.0 * l2 ** 3 / 27.0 - l2 * l3 / 3.0 + l4
    disc = (qq / 2.0) ** 2 + (pp / 3.0) ** 3
    if pp == 0.0 and qq == 0.0:
        ts = (0.0 + 0j, 0.0 + 0j, 0.0 + 0j)
    elif disc > 0.0:
        # one real root, conjugate complex pair; take the cube root on
        # the side that avoids cancellation and recover the partner from
        # u*v = -p/3
        sq = math.sqrt(disc)
        w = -qq / 2.0 - sq if qq > 0.0 else -qq / 2.0 + sq
        u = math.copysign(abs(w) ** (1.0 / 3.0), w)
        v = -pp / (3.0 * u)
        t1 = u + v
        re = -t1 / 2.0
        im = abs(u - v) * math.sqrt(3.0) / 2.0
        ts = (complex(t1, 0.0), complex(re, im), complex(re, -im))
    else:
        # three real roots (possibly repeated): trigonometric form
        r = math.sqrt(-pp / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * qq / (2.0 * pp * r)))
        theta = math.acos(arg)
        ts = tuple(
            complex(2.0 * r * math.cos((theta - 2.0 * math.pi * k) / 3.0), 0.0)
            for k in range(3)
        )
    roots = [t - shift for t in ts]
    # one Newton step per root polishes the closed forms to the rounding
    # floor without disturbing the conjugate pairing
    for i, x in enumerate(roots):
        fpx = (3.0 * x + 2.0 * l2) * x + l3
        if fpx != 0.0:
            step = (((x + l2) * x + l3) * x + l4) / fpx
            if abs(step) < 1e-4 * max(1.0, abs(x)):
                roots[i] = x - step
    if roots[1].imag != 0.0 or roots[2].imag != 0.0:
        re = 0.5 * (roots[1].real + roots[2].real)
        im = 0.5 * (abs(roots[1].imag) + abs(roots[2].imag))
        roots[1], roots[2] = complex(re, im), complex(re, -im)
    return tuple(roots)  # type: ignore[return-value]


def resistant_cubic_coefficients(p: NondimParams, y: float) -> CubicCoefficients:
    """Cubic in g4 for the resistant equilibrium at a frozen agent level y."""
    if p.p3 <= 0 or p.p4 <= 0:
        raise ValueError("p3 and p4 must be > 0 for the resistant cubic")
    denom = p.p3 * p.p4
    l2 = ((-p.mu * p.tau + (p.a4 - 1.0) * p.p4) * p.p3 + p.mu * p.rho * p.tau) / denom
    l3 = (((-p.a4 * p.tau - 1.0) * p.mu + p.d4 * y - p.a4 * p.p4) * p.p3
          + p.rho * p.mu * (p.a4 * p.tau + 1.0)) / denom
    l4 = p.a4 * p.mu * (p.rho - p.p3) / denom
    return CubicCoefficients(1.0, l2, l3, l4)


def resistant_burden_cap(g4: float, p: NondimParams) -> float:
    """Resistant glioma level (g4 tau + 1)(p3 - rho)/p3 at a given g4."""
    return (g4 * p.tau + 1.0) * (p.p3 - p.rho) / p.p3


def _nonexistent_resistant(flags: dict[str, bool], reason: str) -> EquilibriumReport:
    return EquilibriumReport(
        kind=KIND_RESISTANT,
        point=np.zeros(7),
        existence_flags=flags,
        residual=math.inf,
        method=METHOD_CLOSED_FORM,
        exists=False,
        diagnostics={"reason": reason},
    )


def resistant_equilibrium(p: NondimParams, n_scan: int = 400) -> EquilibriumReport:
    """Resistant-glioma equilibrium (0, 0, g3, g4, 0, phi/psi, y).

    The cubic's linear coefficient contains the agent level y, which
    itself depends on g4; substituting y(g4) yields a scalar equation
    solved by bracket scanning on [0, G4_BRACKET_MAX] followed by Brent
    root-finding.  With g4 solved, g3 and y follow in closed form and the
    full-state residual is checked.  When several positive roots exist
    the one with the smallest refined residual is reported and all
    candidates are kept in the diagnostics.
    """
    if p.p3 <= 0:
        raise ValueError("p3 must be > 0")
    flags = {"g3_positive": p.p3 > p.rho}
    if p.p3 <= p.rho:
        flags["P_real"] = False
        return _nonexistent_resistant(flags, "p3 <= rho forces g3 <= 0")

    def f(g4: float) -> float:
        c = resistant_cubic_coefficients(p, _agent_y(g4, p))
        return ((g4 + c.l2) * g4 + c.l3) * g4 + c.l4

    xs = np.linspace(0.0, G4_BRACKET_MAX, n_scan + 1)
    fs = [f(x) for x in xs]
    candidates: list[float] = []
    for i in range(n_scan):
        if fs[i] == 0.0:
            candidates.append(float(xs[i]))
        elif fs[i] * fs[i + 1] < 0.0:
            candidates.append(float(brentq(f, xs[i], xs[i + 1], xtol=1e-15, rtol=8.9e-16)))
    candidates = [g4 for g4 in candidates if g4 > 0]
    if not candidates:
        flags["P_real"] = False
        return _nonexistent_resistant(flags, "no sign change of the g4 cubic in the bracket")

    reports = []
    for g4 in candidates:
        y = _agent_y(g4, p)
        g3 = resistant_burden_cap(g4, p)
        point = np.array([0.0, 0.0, g3, g4, 0.0, p.phi / p.psi, y])
        reports.append((point, _residual(point, p)))
    point, residual = min(reports, key=lambda t: t[1])

    # reality indicator for the Cardano radical of the g4 cubic at the solved y
    c = resistant_cubic_coefficients(p, _agent_y(float(point[model.G4]), p))
    A = 9.0 * c.l2 * c.l3 - 27.0 * c.l4 - 2.0 * c.l2 ** 3
    B = 3.0 * c.l3 - c.l2 ** 2
    flags["P_real"] = A * A >= B

    return EquilibriumReport(
        kind=KIND_RESISTANT,
        point=point,
        existence_flags=flags,
        residual=residual,
        method=METHOD_NEWTON_REFINED,
        diagnostics={
            "g4_candidates": [float(g) for g in candidates],
            "candidate_residuals": [float(r) for _, r in reports],
            "cubic_coefficients": dataclasses.asdict(c),
        },
    )


def polynomial_root_oracle(coeffs) -> np.ndarray:
    """Roots via companion-matrix eigenvalues (verification oracle).

    ``coeffs`` are highest-degree first; degree at most 4.  This route is
    deliberately independent of the closed-form solvers above so the two
    can cross-check each other in tests.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("need at least two coefficients")
    if c.size > 5:
        raise ValueError(f"degree must be <= 4, got {c.size - 1}")
    if c[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    monic = c[1:] / c[0]
    n = monic.size
    comp = np.zeros((n, n), dtype=complex)
    comp[0, :] = -monic
    comp[1:, :-1] = np.eye(n - 1)
    return np.linalg.eigvals(comp)
