"""Adaptive Dormand-Prince 5(4) integrator with switch localization.

The model RHS is discontinuous across three Heaviside surfaces (chemo
agent depleted, anti-angiogenic agent depleted, glial decline turning
on/off).  A generic adaptive stepper slows to a crawl at those surfaces
and can smear the switch over a step; here each accepted step is checked
for a sign change of the switch functions and, if one occurred, the step
is truncated at the crossing (located to ~1e-9 days on the dense-output
interpolant) and the integration restarted on the far side.

A fixed-step mode (no error control, no event handling) is provided for
convergence-order measurements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import model
from .model import G1, G2, G3, G4, STATE_NAMES
from .params import NondimParams

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
])
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

# Quartic interpolant coefficients for dense output (theta powers 1..4
# per stage), the standard continuous extension of this pair.
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

#: Crossing-time localization tolerance, in days.
EVENT_TOL = 1e-9
#: Output values this far below zero are treated as roundoff and clipped.
NEGATIVE_CLIP = 1e-9

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_PI_ALPHA = 0.7 / 5.0
_PI_BETA = 0.4 / 5.0


class SolverError(RuntimeError):
    """Integration failed (step underflow or non-finite state)."""


@dataclass(frozen=True)
class SimConfig:
    """Integration settings.

    stride is the output sampling interval in days; max_step caps the
    internal step.  smoothing_eps > 0 replaces the Heaviside switches by
    a logistic ramp (and disables event localization, which is then
    unnecessary).
    """
    t_end: float
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = np.inf
    stride: float = 1.0
    smoothing_eps: float = 0.0

    def __post_init__(self):
        if not (self.t_end > 0 and np.isfinite(self.t_end)):
            raise ValueError("t_end must be positive and finite")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.stride <= 0:
            raise ValueError("stride must be positive")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")
        if self.smoothing_eps < 0:
            raise ValueError("smoothing_eps must be nonnegative")


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution: times (n,), states (n, 7), and run metadata."""
    times: np.ndarray
    states: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.states.shape != (len(self.times), 7):
            raise ValueError("states must be (len(times), 7)")

    @property
    def burden(self) -> np.ndarray:
        """Total glioma burden g2 + g3 over time."""
        return self.states[:, G2] + self.states[:, G3]

    def column(self, name: str) -> np.ndarray:
        return self.states[:, STATE_NAMES.index(name)]

    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()


@dataclass(frozen=True)
class PortraitEnsemble:
    """Bundle of trajectories from different initial states."""
    trajectories: tuple[Trajectory, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.trajectories) != len(self.labels):
            raise ValueError("one label per trajectory")


def _dense_eval(theta, y0, h, K):
    """Evaluate the quartic interpolant at fraction theta of the step."""
    tp = np.array([theta, theta ** 2, theta ** 3, theta ** 4])
    return y0 + h * (K.T @ (_P @ tp))


def _switch_signs(s, p):
    return tuple(d > 0.0 for d in model.switching_distances(s, p))


def _locate_crossing(p, y0, h, K, idx):
    """Bisect the dense interpolant for switch idx's crossing time fraction."""
    def dist(theta):
        return model.switching_distances(_dense_eval(theta, y0, h, K), p)[idx]

    lo, hi = 0.0, 1.0
    ref = dist(0.0) > 0.0
    while (hi - lo) * h > EVENT_TOL:
        mid = 0.5 * (lo + hi)
        if (dist(mid) > 0.0) == ref:
            lo = mid
        else:
            hi = mid
    return hi


def integrate(state0, p: NondimParams, config: SimConfig) -> Trajectory:
    """Integrate the model from state0 to config.t_end.

    Output is sampled on the dense interpolant at multiples of
    config.stride (plus t_end); tiny negative excursions from roundoff
    are clipped to zero in the output.
    """
    y = np.asarray(state0, dtype=float).copy()
    model.validate_state(y)
    eps = config.smoothing_eps

    def f(s):
        return model.rhs(s, p, smoothing_eps=eps)

    t_end = float(config.t_end)
    out_ts = np.arange(0.0, t_end, config.stride)
    if out_ts[-1] < t_end:
        out_ts = np.append(out_ts, t_end)
    out = np.empty((len(out_ts), 7))
    out[0] = y
    next_out = 1

    t = 0.0
    k0 = f(y)
    # initial step from the usual normed heuristic, capped conservatively
    scale = config.abs_tol + config.rel_tol * np.abs(y)
    d0 = np.linalg.norm(y / scale) / np.sqrt(7.0)
    d1 = np.linalg.norm(k0 / scale) / np.sqrt(7.0)
    h = min(0.01 * d0 / d1 if d1 > 1e-10 else 1e-3, config.max_step, t_end)
    h = max(h, 1e-8)
    err_prev = 1.0
    n_steps = 0
    n_rejected = 0
    n_events = 0
    track_events = eps == 0.0
    signs = _switch_signs(y, p) if track_events else None

    K = np.empty((7, 7))
    while t < t_end:
        h = min(h, t_end - t, config.max_step)
        if h < 1e-14 * max(1.0, t):
            raise SolverError(f"step size underflow at t={t:.6g}")

        K[0] = k0
        for i in range(1, 6):
            K[i] = f(y + h * (_A[i, :i] @ K[:i]))
        y_new = y + h * (_B5[:6] @ K[:6])
        K[6] = f(y_new)

        if not np.all(np.isfinite(y_new)):
            raise SolverError(f"non-finite state at t={t:.6g}")

        scale = config.abs_tol + config.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.linalg.norm((h * (_E @ K)) / scale) / np.sqrt(7.0)

        if err > 1.0:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -_PI_ALPHA)
            n_rejected += 1
            continue

        step_end = t + h
        if track_events:
            new_signs = _switch_signs(y_new, p)
            if new_signs != signs:
                idx = next(i for i in range(3) if new_signs[i] != signs[i])
                theta = _locate_crossing(p, y, h, K, idx)
                step_end = t + theta * h
                y_new = _dense_eval(theta, y, h, K)
                n_events += 1

        # sample dense output inside the accepted (possibly truncated) step
        while next_out < len(out_ts) and out_ts[next_out] <= step_end + 1e-12:
            theta_s = (out_ts[next_out] - t) / h
            out[next_out] = _dense_eval(min(theta_s, 1.0), y, h, K)
            next_out += 1

        t, y = step_end, y_new
        # the agents and cell populations are nonnegative by construction;
        # clamp interpolation roundoff so switch states stay consistent
        np.clip(y, 0.0, None, out=y)
        k0 = f(y)
        if track_events:
            signs = _switch_signs(y, p)
        n_steps += 1

        factor = _SAFETY * err ** -_PI_ALPHA * err_prev ** _PI_BETA if err > 0 else _MAX_FACTOR
        h *= min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        err_prev = max(err, 1e-4)

    np.clip(out, -NEGATIVE_CLIP, None, out=out)
    np.clip(out, 0.0, None, out=out)
    return Trajectory(
        times=out_ts,
        states=out,
        metadata={
            "steps": n_steps,
            "rejected_steps": n_rejected,
            "switch_events": n_events,
            "rel_tol": config.rel_tol,
            "abs_tol": config.abs_tol,
            "t_end": t_end,
        },
    )


def integrate_fixed(state0, p: NondimParams, t_end: float, h: float,
                    smoothing_eps: float = 0.0) -> np.ndarray:
    """Fixed-step fifth-order run; returns the final state only.

    No error control or event handling -- intended for convergence
    studies on smooth stretches of the flow.
    """
    y = np.asarray(state0, dtype=float).copy()
    n = int(round(t_end / h))
    if abs(n * h - t_end) > 1e-9 * t_end:
        raise ValueError("t_end must be an integer multiple of h")

    def f(s):
        return model.rhs(s, p, smoothing_eps=smoothing_eps)

    K = np.empty((7, 7))
    for _ in range(n):
        K[0] = f(y)
        for i in range(1, 6):
            K[i] = f(y + h * (_A[i, :i] @ K[:i]))
        y = y + h * (_B5[:6] @ K[:6])
        if not np.all(np.isfinite(y)):
            raise SolverError("non-finite state in fixed-step run")
    return y


def convergence_order(state0, p: NondimParams, t_end: float = 128.0,
                      h: float = 16.0) -> float:
    """Observed order from a Richardson triple at steps h, h/2, h/4.

    The model's rates are slow (~0.1/day at most), so small steps sit at
    the roundoff floor; the default step is deliberately coarse.  Start
    from a state away from the switching surfaces (e.g. a short adaptive
    run past the treatment onset) or the fixed-step runs straddle a
    discontinuity and the measured order collapses.
    """
    y1 = integrate_fixed(state0, p, t_end, h)
    y2 = integrate_fixed(state0, p, t_end, h / 2)
    y4 = integrate_fixed(state0, p, t_end, h / 4)
    e1 = np.linalg.norm(y1 - y2)
    e2 = np.linalg.norm(y2 - y4)
    if e2 == 0.0:
        raise SolverError("refinement differences vanished; enlarge h")
    return float(np.log2(e1 / e2))


def phase_portrait(initial_states, p: NondimParams, config: SimConfig,
                   labels=None) -> PortraitEnsemble:
    """Integrate several initial states under one configuration."""
    initial_states = [np.asarray(s, dtype=float) for s in initial_states]
    if labels is None:
        labels = [f"ic{i}" for i in range(len(initial_states))]
    trajs = tuple(integrate(s, p, config) for s in initial_states)
    return PortraitEnsemble(trajectories=trajs, labels=tuple(labels))
