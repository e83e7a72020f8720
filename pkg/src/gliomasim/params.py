"""Parameter sets for the seven-compartment glioma model.

Two representations exist:

* :class:`DimensionalParams` -- rates and capacities in physical units
  (day^-1, kg m^-3).  Never integrated directly; only used as a source
  for the non-dimensional set.
* :class:`NondimParams` -- the canonical, dimensionless parameter set.
  Every computation in this package (RHS, equilibria, Jacobians,
  trajectories) runs on this set.

Parameter files are flat JSON documents with a ``dimensional`` and/or a
``nondimensional`` top-level block whose keys match the dataclass field
names exactly.  When both blocks are present the non-dimensional block
wins and a warning is emitted.
"""

from __future__ import annotations

import dataclasses
import json
import warnings
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path


class ParameterError(ValueError):
    """Raised for out-of-range or malformed parameter values."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParameterError(msg)


@dataclass(frozen=True)
class DimensionalParams:
    """Physical-unit parameters of the dimensional system.

    ``k4`` is carried for completeness but the model equations only use
    ``k1..k3``; it does not enter the non-dimensionalization.
    """

    p1: float
    p2: float
    p3: float
    p4: float
    k1: float
    k2: float
    k3: float
    k4: float
    kappa1: float
    kappa2: float
    kappa3: float
    chi: float
    u: float
    rho: float
    Phi: float
    omega: float
    D10: float
    D11: float
    D12: float
    D20: float
    D21: float
    D22: float
    D50: float
    D51: float
    D52: float
    D4: float
    A1: float
    A2: float
    A4: float
    A5: float
    phi: float
    psi: float
    delta: float
    gamma: float
    c1: float
    c2: float
    c4: float
    c5: float

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            _require(isinstance(v, (int, float)) and v == v, f"{f.name} must be a finite number")
            _require(v >= 0, f"{f.name} must be >= 0, got {v}")
        for name in ("k1", "k2", "k3", "k4"):
            _require(getattr(self, name) > 0, f"{name} must be > 0")
        for name in ("A1", "A2", "A4", "A5"):
            _require(getattr(self, name) > 0, f"{name} must be > 0")
        _require(self.psi > 0, "psi must be > 0")
        _require(self.gamma > 0, "gamma must be > 0")
        _require(0.0 <= self.u <= 1.0, f"u must lie in [0, 1], got {self.u}")
        _require(0.0 <= self.rho <= 1.0, f"rho must lie in [0, 1], got {self.rho}")


@dataclass(frozen=True)
class NondimParams:
    """Dimensionless parameters of the canonical system."""

    p1: float
    p2: float
    p3: float
    p4: float
    beta1: float
    beta2: float
    beta3: float
    tau: float
    mu: float
    alpha: float
    u: float
    rho: float
    a1: float
    a2: float
    a4: float
    a5: float
    d10: float
    d11: float
    d12: float
    d20: float
    d21: float
    d22: float
    d50: float
    d51: float
    d52: float
    d4: float
    phi: float
    psi: float
    delta: float
    gamma: float
    c1: float
    c2: float
    c4: float
    c5: float

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            _require(isinstance(v, (int, float)) and v == v, f"{f.name} must be a finite number")
            _require(v >= 0, f"{f.name} must be >= 0, got {v}")
        _require(self.psi > 0, "psi must be > 0")
        _require(self.gamma > 0, "gamma must be > 0")
        for name in ("a1", "a2", "a4", "a5"):
            _require(getattr(self, name) > 0, f"{name} must be > 0")

    def replace(self, **changes: float) -> "NondimParams":
        """Return a copy with the given fields overridden."""
        unknown = set(changes) - {f.name for f in fields(self)}
        if unknown:
            raise ParameterError(f"unknown parameter keys: {sorted(unknown)}")
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


def nondimensionalize(dp: DimensionalParams) -> NondimParams:
    """Map the dimensional parameter set onto the dimensionless one.

    Cell concentrations are rescaled by their carrying capacities, which
    turns the competition, angiogenesis and kill coefficients into

        beta1 = kappa1*k2,  beta2 = kappa2*k1,  beta3 = kappa3*k1,
        alpha = omega*k1,   a_i = A_i/k_i,
        mu = Phi*k3/k2,     tau = chi*k3/k2,
        d_i0 = D_i0/k_i,    d_i1 = D_i1*k3/k_i,  d_i2 = D_i2/k_i   (i = 1, 2, 5),
        d4 = D4/k3,

    while the proliferation rates, the mutation/dormancy rates and the
    infusion/clearance/combination rates pass through unchanged.  The
    neuron compartment has no dedicated capacity in the dimensional
    table; its scalings use k1 (glial tissue scale).
    """
    k5 = dp.k1
    return NondimParams(
        p1=dp.p1, p2=dp.p2, p3=dp.p3, p4=dp.p4,
        beta1=dp.kappa1 * dp.k2,
        beta2=dp.kappa2 * dp.k1,
        beta3=dp.kappa3 * dp.k1,
        tau=dp.chi * dp.k3 / dp.k2,
        mu=dp.Phi * dp.k3 / dp.k2,
        alpha=dp.omega * dp.k1,
        u=dp.u, rho=dp.rho,
        a1=dp.A1 / dp.k1,
        a2=dp.A2 / dp.k2,
        a4=dp.A4 / dp.k3,
        a5=dp.A5 / k5,
        d10=dp.D10 / dp.k1, d11=dp.D11 * dp.k3 / dp.k1, d12=dp.D12 / dp.k1,
        d20=dp.D20 / dp.k2, d21=dp.D21 * dp.k3 / dp.k2, d22=dp.D22 / dp.k2,
        d50=dp.D50 / k5, d51=dp.D51 * dp.k3 / k5, d52=dp.D52 / k5,
        d4=dp.D4 / dp.k3,
        phi=dp.phi, psi=dp.psi, delta=dp.delta, gamma=dp.gamma,
        c1=dp.c1, c2=dp.c2, c4=dp.c4, c5=dp.c5,
    )


_DIM_FIELDS = {f.name for f in fields(DimensionalParams)}
_NONDIM_FIELDS = {f.name for f in fields(NondimParams)}


def params_from_mapping(doc: dict) -> NondimParams:
    """Build a :class:`NondimParams` from a parsed parameter document.

    The document must contain a ``dimensional`` and/or ``nondimensional``
    block.  If both are present, ``nondimensional`` wins and a warning is
    emitted.  Unknown keys inside a block are rejected.
    """
    dim = doc.get("dimensional")
    nondim = doc.get("nondimensional")
    if dim is None and nondim is None:
        raise ParameterError("config must contain a 'dimensional' or 'nondimensional' block")
    if dim is not None and nondim is not None:
        warnings.warn(
            "config contains both 'dimensional' and 'nondimensional' blocks; "
            "using 'nondimensional'",
            stacklevel=2,
        )
    if nondim is not None:
        unknown = set(nondim) - _NONDIM_FIELDS
        if unknown:
            raise ParameterError(f"unknown nondimensional keys: {sorted(unknown)}")
        missing = _NONDIM_FIELDS - set(nondim)
        if missing:
            raise ParameterError(f"missing nondimensional keys: {sorted(missing)}")
        return NondimParams(**{k: float(v) for k, v in nondim.items()})
    unknown = set(dim) - _DIM_FIELDS
    if unknown:
        raise ParameterError(f"unknown dimensional keys: {sorted(unknown)}")
    missing = _DIM_FIELDS - set(dim)
    if missing:
        raise ParameterError(f"missing dimensional keys: {sorted(missing)}")
    return nondimensionalize(DimensionalParams(**{k: float(v) for k, v in dim.items()}))


def _initial_state_from(doc: dict) -> tuple[float, ...] | None:
    state = doc.get("initial_state")
    if state is None:
        return None
    state = tuple(float(v) for v in state)
    if len(state) != 7 or any(v < 0 for v in state):
        raise ParameterError("initial_state must be 7 nonnegative numbers")
    return state


def load_params(path: str | Path) -> tuple[NondimParams, tuple[float, ...] | None]:
    """Load a parameter JSON file.

    Returns the parameter set and the file's optional ``initial_state``
    (None when absent); see :func:`params_from_mapping` for the block
    structure.
    """
    with open(path) as fh:
        doc = json.load(fh)
    return params_from_mapping(doc), _initial_state_from(doc)


def dump_params(p: NondimParams, path: str | Path) -> None:
    """Serialize a non-dimensional parameter set as a loadable config."""
    Path(path).write_text(json.dumps({"nondimensional": p.to_dict()}, indent=2) + "\n")


def load_bundled_config(name: str) -> dict:
    """Return the parsed JSON document of a bundled config.

    Bundled names: ``glioma_free`` (baseline table values with the
    glioma-free simulation choices u=0.001, rho=0.01, alpha=2) and
    ``resistant`` (the resistant-glioma choices p3=0.006, u=0.01,
    rho=0.003, phi=4e-3, delta=2.9e-4, alpha=2).
    """
    ref = resources.files("gliomasim").joinpath(f"configs/{name}.json")
    try:
        text = ref.read_text()
    except FileNotFoundError:
        raise ParameterError(f"no bundled config named {name!r}") from None
    return json.loads(text)


def bundled_params(name: str) -> tuple[NondimParams, tuple[float, ...] | None]:
    """Parameter set and default initial state of a bundled config."""
    doc = load_bundled_config(name)
    return params_from_mapping(doc), _initial_state_from(doc)
