"""Command-line interface.

Usage:
    gliomasim <scenario> [--config PATH] [--set key=value ...]
              [--t-end DAYS] [--out DIR] [--formats csv,json,plotscript,png]
              [--jobs N]
    gliomasim sweep --param rho --values 0.001,0.003,0.006,0.01 [...]

The output directory may also be set through the GLIOMASIM_OUT
environment variable (the --out flag wins).  Exit codes: 0 on success,
1 on a numeric failure (diagnostic JSON goes to the output directory),
2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .equilibria import EquilibriumError
from .params import ParameterError
from .scenarios import (
    FORMATS,
    SCENARIO_NAMES,
    ScenarioError,
    ScenarioSpec,
    SweepSpec,
    run_scenario,
    run_sweep,
)
from .solver import SimConfig, SolverError

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2


def _parse_override(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"value in {text!r} is not a number")


def _parse_values(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gliomasim",
        description="Glioma growth simulation under combined chemotherapy "
                    "and anti-angiogenic therapy.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="SCENARIO")

    def add_common(sp):
        sp.add_argument("--config", type=Path, default=None,
                        help="JSON parameter file (overrides the bundled config)")
        sp.add_argument("--set", dest="overrides", metavar="KEY=VALUE",
                        type=_parse_override, action="append", default=[],
                        help="override a single parameter (repeatable)")
        sp.add_argument("--t-end", type=float, default=10000.0,
                        help="simulation horizon in days (default 10000)")
        sp.add_argument("--out", type=Path, default=None,
                        help="output directory (default $GLIOMASIM_OUT or ./out)")
        sp.add_argument("--formats", type=str, default="csv,json",
                        help=f"comma list from {{{','.join(FORMATS)}}}")
        sp.add_argument("--jobs", type=int, default=1,
                        help="max concurrent trajectories for grids/sweeps")

    for name in SCENARIO_NAMES:
        add_common(sub.add_parser(name, help=f"run the {name} experiment"))

    sw = sub.add_parser("sweep", help="sweep one parameter over a value list")
    add_common(sw)
    sw.add_argument("--param", default="rho", help="parameter to sweep")
    sw.add_argument("--values", type=_parse_values, required=True,
                    help="comma-separated values")
    return parser


def _resolve_out(args) -> Path:
    if args.out is not None:
        return args.out
    env = os.environ.get("GLIOMASIM_OUT")
    return Path(env) if env else Path("out")


def _spec_from_args(args, name: str) -> ScenarioSpec:
    formats = tuple(f.strip() for f in args.formats.split(",") if f.strip())
    return ScenarioSpec(
        name=name,
        overrides=dict(args.overrides),
        sim=SimConfig(t_end=args.t_end),
        out_dir=_resolve_out(args),
        formats=formats,
        config_path=args.config,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.command == "sweep":
            base = _spec_from_args(args, "rho-sweep")
            sweep = SweepSpec(parameter=args.param, values=args.values)
            summary = run_sweep(sweep, base, jobs=max(args.jobs, 1))
        else:
            spec = _spec_from_args(args, args.command)
            summary = run_scenario(spec, jobs=max(args.jobs, 1))
    except (ScenarioError, ParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, EquilibriumError, FloatingPointError) as exc:
        out = _resolve_out(args)
        out.mkdir(parents=True, exist_ok=True)
        diag = {"error": type(exc).__name__, "message": str(exc),
                "command": args.command}
        (out / "failure.json").write_text(json.dumps(diag, indent=2) + "\n")
        print(f"numeric failure: {exc} (diagnostics in {out / 'failure.json'})",
              file=sys.stderr)
        return EXIT_NUMERIC

    for f in summary.get("files", []):
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
