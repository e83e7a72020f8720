"""Named experiment runners and artifact writers.

Each scenario produces a set of files in an output directory: a JSON
report, optional trajectory CSVs, optional standalone plot scripts or
rendered PNG figures, and a manifest listing every artifact with its
SHA-256 digest.  All writes are atomic (temp file in the target
directory, then rename) so a crashed run never leaves a truncated
artifact behind.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import equilibria, stability
from .model import G4, STATE_NAMES
from .params import NondimParams, bundled_params, load_params
from .plotting import render_portrait, render_sweep, render_trajectory
from .solver import PortraitEnsemble, SimConfig, Trajectory, integrate, phase_portrait

SCENARIO_NAMES = (
    "e0-analysis", "glioma-free", "resistant", "rho-sweep", "portrait", "threshold",
)
FORMATS = ("csv", "json", "plotscript", "png")

#: Default initial state for trajectory scenarios: mostly-intact glial and
#: neuron tissue, a small sensitive-glioma seed with a larger resistant
#: fraction, and angiogenically stimulated vasculature.
DEFAULT_INITIAL_STATE = (0.5, 0.05, 0.5, 1.2, 0.9, 0.0, 0.0)

CSV_HEADER = "t," + ",".join(STATE_NAMES) + ",burden"

#: Corner grid of initial states for the phase portrait: low/high glial,
#: resistant-glioma, and endothelial levels with fixed small offsets so
#: no corner starts exactly on an invariant plane.
PORTRAIT_GRID = tuple(
    (g1, 0.05, g3, g4, 0.9, 0.0, 0.0)
    for g1 in (0.15, 0.85)
    for g3 in (0.1, 0.9)
    for g4 in (0.3, 1.5)
)


class ScenarioError(ValueError):
    """Unknown scenario name or invalid scenario configuration."""


@dataclass(frozen=True)
class ScenarioSpec:
    """What to run and where to put the results."""
    name: str
    overrides: dict = field(default_factory=dict)
    sim: SimConfig = field(default_factory=lambda: SimConfig(t_end=10000.0))
    out_dir: Path = Path("out")
    formats: tuple[str, ...] = ("csv", "json")
    config_path: Path | None = None
    initial_state: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.name not in SCENARIO_NAMES:
            raise ScenarioError(f"unknown scenario {self.name!r}; "
                                f"choose from {', '.join(SCENARIO_NAMES)}")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ScenarioError(f"unknown output formats: {', '.join(bad)}")
        object.__setattr__(self, "out_dir", Path(self.out_dir))


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter family of runs with a scalar summary per value."""
    parameter: str = "rho"
    values: tuple[float, ...] = ()
    metric: str = "final_burden"

    def __post_init__(self):
        if not self.values:
            raise ScenarioError("sweep requires at least one value")
        if self.metric not in ("final_burden", "peak_burden"):
            raise ScenarioError(f"unknown sweep metric {self.metric!r}")


def _atomic_write(path: Path, data: str | bytes) -> Path:
    """Write via a sibling temp file and rename; returns the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def trajectory_csv(traj: Trajectory) -> str:
    """CSV text: time, all seven states, total burden, round-trip floats."""
    lines = [CSV_HEADER]
    burden = traj.burden
    for i, t in enumerate(traj.times):
        row = [repr(float(t))]
        row += [repr(float(v)) for v in traj.states[i]]
        row.append(repr(float(burden[i])))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def trajectory_json(traj: Trajectory) -> str:
    doc = {
        "t": [float(v) for v in traj.times],
        **{name: [float(v) for v in traj.states[:, i]]
           for i, name in enumerate(STATE_NAMES)},
        "burden": [float(v) for v in traj.burden],
        "solver": traj.metadata,
    }
    return json.dumps(doc, indent=2) + "\n"


_TRAJ_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Plot all populations from {csv} (same directory as this script).\"\"\"
import csv
from pathlib import Path
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open(Path(__file__).parent / {csv!r})))
t = [float(r["t"]) for r in rows]
fig, ax = plt.subplots(figsize=(9, 5.5))
for col in ["g1", "g2", "g3", "g4", "g5", "q", "y", "burden"]:
    ax.plot(t, [float(r[col]) for r in rows], label=col)
ax.set_xlabel("time (days)")
ax.set_ylabel("scaled density / concentration")
ax.legend()
ax.grid(alpha=0.3)
fig.tight_layout()
fig.savefig(Path(__file__).with_suffix(".png"), dpi=150)
"""

_PORTRAIT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"3D phase portrait on (g1, g3, g4) from the sibling trajectory CSVs.\"\"\"
import csv
from pathlib import Path
import matplotlib.pyplot as plt

fig = plt.figure(figsize=(7, 6))
ax = fig.add_subplot(projection="3d")
for name in {csvs!r}:
    rows = list(csv.DictReader(open(Path(__file__).parent / name)))
    ax.plot([float(r["g1"]) for r in rows],
            [float(r["g3"]) for r in rows],
            [float(r["g4"]) for r in rows], label=name)
ax.set_xlabel("g1")
ax.set_ylabel("g3")
ax.set_zlabel("g4")
fig.tight_layout()
fig.savefig(Path(__file__).with_suffix(".png"), dpi=150)
"""

_SWEEP_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Burden-vs-time curves for each sweep entry (sibling CSVs).\"\"\"
import csv
from pathlib import Path
import matplotlib.pyplot as plt

fig, ax = plt.subplots(figsize=(9, 5.5))
for label, name in {csvs!r}:
    rows = list(csv.DictReader(open(Path(__file__).parent / name)))
    ax.plot([float(r["t"]) for r in rows],
            [float(r["burden"]) for r in rows], label=label)
ax.set_xlabel("time (days)")
ax.set_ylabel("glioma burden")
ax.legend()
ax.grid(alpha=0.3)
fig.tight_layout()
fig.savefig(Path(__file__).with_suffix(".png"), dpi=150)
"""


def emit_plotscript(artifact, out_path: Path, csv_names) -> Path:
    """Write a standalone plot script for a produced artifact.

    The script references its data CSVs by name relative to its own
    location, so the output directory can be moved wholesale.
    """
    if isinstance(artifact, Trajectory):
        text = _TRAJ_SCRIPT.format(csv=str(csv_names[0]))
    elif isinstance(artifact, PortraitEnsemble):
        text = _PORTRAIT_SCRIPT.format(csvs=[str(n) for n in csv_names])
    elif isinstance(artifact, (list, tuple)):  # sweep table: (label, csv) pairs
        text = _SWEEP_SCRIPT.format(csvs=[(str(a), str(b)) for a, b in artifact])
    else:
        raise ScenarioError(f"cannot emit plot script for {type(artifact).__name__}")
    return _atomic_write(out_path, text)


def write_manifest(out_dir: Path, files) -> Path:
    """Record every artifact with its SHA-256 content digest."""
    entries = []
    for f in sorted(Path(f) for f in files):
        digest = hashlib.sha256(f.read_bytes()).hexdigest()
        entries.append({"file": f.name, "sha256": digest, "bytes": f.stat().st_size})
    doc = json.dumps({"files": entries}, indent=2) + "\n"
    return _atomic_write(Path(out_dir) / "manifest.json", doc)


def resolve_params(spec: ScenarioSpec) -> tuple[NondimParams, tuple[float, ...]]:
    """Parameters + initial state for a scenario spec.

    Precedence: explicit config file, else the bundled config matching
    the scenario (`resistant` has its own; everything else uses the
    glioma-free baseline), with --set overrides applied last.
    """
    if spec.config_path is not None:
        p, state = load_params(spec.config_path)
    else:
        name = "resistant" if spec.name == "resistant" else "glioma_free"
        p, state = bundled_params(name)
    if spec.overrides:
        p = p.replace(**spec.overrides)
    if spec.initial_state is not None:
        state = tuple(spec.initial_state)
    if state is None:
        state = DEFAULT_INITIAL_STATE
    return p, state


def _write_trajectory_artifacts(spec, traj, stem, files, title=""):
    out = spec.out_dir
    csv_name = f"{stem}.csv"
    if "csv" in spec.formats or "plotscript" in spec.formats:
        files.append(_atomic_write(out / csv_name, trajectory_csv(traj)))
    if "json" in spec.formats:
        files.append(_atomic_write(out / f"{stem}.json", trajectory_json(traj)))
    if "plotscript" in spec.formats:
        files.append(emit_plotscript(traj, out / f"plot_{stem}.py", [csv_name]))
    if "png" in spec.formats:
        files.append(render_trajectory(traj, out / f"{stem}.png", title=title))


def _equilibrium_scenario(spec: ScenarioSpec, p: NondimParams, state) -> dict:
    """Shared body of the glioma-free and resistant scenarios."""
    files: list[Path] = []
    if spec.name == "glioma-free":
        report = equilibria.glioma_free_equilibrium(p)
        if not report.exists:
            raise equilibria.EquilibriumError(
                "no glioma-free equilibrium at these parameters: "
                + report.diagnostics.get("reason", "existence conditions violated"))
        flags = {k: v for k, v in stability.theorem2_conditions(p, report).items()
                 if isinstance(v, bool)}
    else:
        report = equilibria.resistant_equilibrium(p)
        if not report.exists:
            raise equilibria.EquilibriumError(
                "no persistent resistant equilibrium at these parameters: "
                + report.diagnostics.get("reason", "existence conditions violated"))
        flags = {"exists": report.exists}
    stab = stability.stability_report(report.point, p, theorem_flags=flags)
    traj = integrate(np.asarray(state), p, spec.sim)

    summary = {
        "scenario": spec.name,
        "equilibrium": report.to_dict(),
        "stability": stab.to_dict(),
        "trajectory_final": {name: float(v) for name, v
                             in zip(STATE_NAMES, traj.final_state())},
        "final_burden": float(traj.burden[-1]),
    }
    files.append(_atomic_write(spec.out_dir / "report.json",
                               json.dumps(summary, indent=2) + "\n"))
    _write_trajectory_artifacts(spec, traj, "trajectory", files,
                                title=f"{spec.name} scenario")
    files.append(write_manifest(spec.out_dir, files))
    summary["files"] = [str(f) for f in files]
    return summary


def _e0_scenario(spec: ScenarioSpec, p: NondimParams) -> dict:
    report = equilibria.trivial_equilibrium(p)
    cond = stability.theorem1_conditions(p)
    closed_form = cond.pop("eigenvalues")
    stab = stability.stability_report(
        report.point, p,
        theorem_flags={k: bool(v) for k, v in cond.items()})
    summary = {
        "scenario": spec.name,
        "equilibrium": report.to_dict(),
        "stability": stab.to_dict(),
        "closed_form_eigenvalues": [float(v) for v in np.sort(closed_form)],
        "verdict": stab.classification,
    }
    files = [_atomic_write(spec.out_dir / "report.json",
                           json.dumps(summary, indent=2) + "\n")]
    if "csv" in spec.formats:
        files.append(_atomic_write(spec.out_dir / "jacobian.csv", stab.matrix_csv()))
    files.append(write_manifest(spec.out_dir, files))
    summary["files"] = [str(f) for f in files]
    return summary


def _threshold_scenario(spec: ScenarioSpec, p: NondimParams) -> dict:
    phi_c = stability.critical_chemo_infusion(p)
    lam = stability.trivial_eigenvalues(p)
    summary = {
        "scenario": spec.name,
        "critical_chemo_infusion": None if phi_c is None else float(phi_c),
        "stabilizable": phi_c is not None,
        "trivial_eigenvalues": [float(v) for v in np.sort(lam)],
        "phi": p.phi,
    }
    files = [_atomic_write(spec.out_dir / "report.json",
                           json.dumps(summary, indent=2) + "\n")]
    files.append(write_manifest(spec.out_dir, files))
    summary["files"] = [str(f) for f in files]
    return summary


def _portrait_scenario(spec: ScenarioSpec, p: NondimParams, jobs: int = 1) -> dict:
    labels = [f"ic{i}" for i in range(len(PORTRAIT_GRID))]
    sim = spec.sim
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trajs = tuple(pool.map(
                lambda s: integrate(np.asarray(s), p, sim), PORTRAIT_GRID))
        ensemble = PortraitEnsemble(trajectories=trajs, labels=tuple(labels))
    else:
        ensemble = phase_portrait(PORTRAIT_GRID, p, sim, labels=labels)

    files: list[Path] = []
    csv_names = []
    for label, traj in zip(labels, ensemble.trajectories):
        name = f"{label}.csv"
        csv_names.append(name)
        if "csv" in spec.formats or "plotscript" in spec.formats:
            files.append(_atomic_write(spec.out_dir / name, trajectory_csv(traj)))
        if "json" in spec.formats:
            files.append(_atomic_write(spec.out_dir / f"{label}.json",
                                       trajectory_json(traj)))
    if "plotscript" in spec.formats:
        files.append(emit_plotscript(ensemble, spec.out_dir / "plot_portrait.py",
                                     csv_names))
    if "png" in spec.formats:
        files.append(render_portrait(ensemble, spec.out_dir / "portrait.png",
                                     title="phase portrait"))
    summary = {
        "scenario": spec.name,
        "initial_states": [list(s) for s in PORTRAIT_GRID],
        "final_states": [[float(v) for v in t.final_state()]
                         for t in ensemble.trajectories],
    }
    files.append(_atomic_write(spec.out_dir / "report.json",
                               json.dumps(summary, indent=2) + "\n"))
    files.append(write_manifest(spec.out_dir, files))
    summary["files"] = [str(f) for f in files]
    return summary


DEFAULT_SWEEP_VALUES = (0.001, 0.003, 0.006, 0.01)


def run_sweep(sweep: SweepSpec, base: ScenarioSpec, jobs: int = 1) -> dict:
    """One run per sweep value plus a summary table artifact.

    Entries run concurrently up to ``jobs`` workers; each entry's CSV is
    written atomically by its own task and the table, report, and
    manifest are written once at the end.
    """
    p0, state = resolve_params(base)
    state = np.asarray(state, dtype=float)
    values = tuple(float(v) for v in sweep.values)

    def run_one(v: float):
        pv = p0.replace(**{sweep.parameter: v})
        traj = integrate(state, pv, base.sim)
        eq = (equilibria.resistant_equilibrium(pv) if v < pv.p3
              else equilibria.trivial_equilibrium(pv))
        klass = stability.stability_report(eq.point, pv).classification if eq.exists \
            else "nonexistent"
        cap = equilibria.resistant_burden_cap(eq.point[G4], pv) if (
            eq.exists and eq.kind == "resistant") else 0.0
        return traj, {
            sweep.parameter: v,
            "final_burden": float(traj.burden[-1]),
            "peak_burden": float(traj.burden.max()),
            "regime": "decay" if v >= pv.p3 else "persistence",
            "equilibrium_kind": eq.kind,
            "classification": klass,
            "predicted_cap": float(cap),
        }

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, values))
    else:
        results = [run_one(v) for v in values]

    files: list[Path] = []
    pairs = []
    for v, (traj, _) in zip(values, results):
        name = f"{sweep.parameter}_{v:g}.csv"
        pairs.append((f"{sweep.parameter}={v:g}", name))
        if "csv" in base.formats or "plotscript" in base.formats:
            files.append(_atomic_write(base.out_dir / name, trajectory_csv(traj)))

    rows = [r for _, r in results]
    header = ",".join(rows[0].keys())
    table = "\n".join(
        [header] + [",".join(repr(v) if isinstance(v, float) else str(v)
                             for v in r.values()) for r in rows]) + "\n"
    files.append(_atomic_write(base.out_dir / "sweep_table.csv", table))

    if "plotscript" in base.formats:
        files.append(emit_plotscript(pairs, base.out_dir / "plot_sweep.py", None))
    if "png" in base.formats:
        files.append(render_sweep(values, [t for t, _ in results],
                                  base.out_dir / "sweep.png",
                                  parameter=sweep.parameter,
                                  title=f"{sweep.parameter} sweep"))
    summary = {"scenario": "rho-sweep", "parameter": sweep.parameter, "rows": rows}
    files.append(_atomic_write(base.out_dir / "report.json",
                               json.dumps(summary, indent=2) + "\n"))
    files.append(write_manifest(base.out_dir, files))
    summary["files"] = [str(f) for f in files]
    return summary


def run_scenario(spec: ScenarioSpec, jobs: int = 1) -> dict:
    """Dispatch a named scenario; returns the report dict.

    Raises ScenarioError / ParameterError for configuration problems and
    SolverError (or EquilibriumError) for numeric failures; the CLI maps
    those onto exit codes 2 and 1 respectively.
    """
    p, state = resolve_params(spec)
    if spec.name in ("glioma-free", "resistant"):
        return _equilibrium_scenario(spec, p, state)
    if spec.name == "e0-analysis":
        return _e0_scenario(spec, p)
    if spec.name == "threshold":
        return _threshold_scenario(spec, p)
    if spec.name == "portrait":
        return _portrait_scenario(spec, p, jobs=jobs)
    if spec.name == "rho-sweep":
        return run_sweep(SweepSpec(parameter="rho", values=DEFAULT_SWEEP_VALUES),
                         spec, jobs=jobs)
    raise ScenarioError(f"unknown scenario {spec.name!r}")
