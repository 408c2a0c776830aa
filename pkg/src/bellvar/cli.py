"""Command-line front end.

Exit status: 0 on success, 1 on domain, validation or I/O errors, 2 on
usage errors. Results go to stdout as JSON unless ``--out``/``--csv``
says otherwise.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bell import MeasurementSettings, Observable, correlation, evaluate_eq6
from .optimize import OptimizerConfig, maximize_violation
from .qstate import (
    DomainError,
    QubitPairState,
    bell_decomposition,
    concurrence,
    decomposition_from_dict,
    decomposition_to_dict,
    eigen_decomposition,
    mems_decomposition,
    mems_state,
    product_decomposition,
    separable_state,
    state_from_dict,
    state_to_dict,
    validate_decomposition,
    werner_decomposition,
    werner_state,
)
from .sampler import sample_correlation
from .sweep import PRESETS, SweepSpec, rows_to_csv, run_sweep


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("BELLVAR_JOBS", "1")))
    except ValueError:
        return 1


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_argument_group("state source (exactly one of --family / --input)")
    only = src.add_mutually_exclusive_group(required=True)
    only.add_argument("--family", choices=["mems", "werner", "separable"])
    only.add_argument("--input", metavar="JSON", help="state {matrix} or decomposition {terms[, matrix]} file")
    src.add_argument("--gamma", type=float)
    src.add_argument("--xi", type=float, default=np.pi / 4, help="Werner angle in radians (default pi/4)")
    src.add_argument("--x", type=float, help="separable-state parameter, |x| <= 1/4")
    src.add_argument(
        "--decomposition", choices=["bell", "product"], default="bell", help="realization of the separable state"
    )


def _add_optimizer(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("optimizer")
    g.add_argument("--config", metavar="JSON", help="optimizer config file; flags override it")
    g.add_argument("--mode", choices=["plane", "bloch"])
    g.add_argument("--grid-points", type=int)
    g.add_argument("--seeds", type=int, dest="refine_seeds")
    g.add_argument("--max-iter", type=int, dest="max_refine_iterations")
    g.add_argument("--tol", type=float, dest="convergence_tolerance")
    g.add_argument("--seed", type=int, dest="rng_seed")


def _optimizer_config(args) -> OptimizerConfig:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    overrides = {
        "observable_mode": args.mode,
        "coarse_grid_points_per_axis": args.grid_points,
        "refine_seeds": args.refine_seeds,
        "max_refine_iterations": args.max_refine_iterations,
        "convergence_tolerance": args.convergence_tolerance,
        "rng_seed": args.rng_seed,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return OptimizerConfig.from_dict(data)


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise DomainError(f"--family {args.family} requires " + ", ".join(f"--{n}" for n in missing))


def _load_input(path):
    data = json.loads(Path(path).read_text())
    if "terms" in data:
        return decomposition_from_dict(data)
    if "matrix" in data:
        return state_from_dict(data)
    raise DomainError(f"{path}: expected a 'terms' or 'matrix' field")


def _state(args) -> QubitPairState:
    if args.input:
        obj = _load_input(args.input)
        return obj if isinstance(obj, QubitPairState) else obj.source
    if args.family == "mems":
        _need(args, "gamma")
        return mems_state(args.gamma)
    if args.family == "werner":
        _need(args, "gamma")
        return werner_state(args.gamma, args.xi)
    _need(args, "x")
    return separable_state(args.x)


def _decomposition(args):
    if args.input:
        obj = _load_input(args.input)
        return eigen_decomposition(obj) if isinstance(obj, QubitPairState) else obj
    if args.family == "mems":
        _need(args, "gamma")
        return mems_decomposition(args.gamma)
    if args.family == "werner":
        _need(args, "gamma")
        return werner_decomposition(args.gamma, args.xi)
    _need(args, "x")
    builder = bell_decomposition if args.decomposition == "bell" else product_decomposition
    return builder(args.x)


def _angles(values, degrees: bool) -> list[float]:
    return [float(np.deg2rad(v)) for v in values] if degrees else list(values)


def _observable(values, mode: str) -> Observable:
    if mode == "plane":
        if len(values) != 1:
            raise DomainError("plane observables take one angle")
        return Observable.plane(values[0])
    if len(values) != 2:
        raise DomainError("bloch observables take polar,azimuth")
    return Observable.from_angles(*values)


def cmd_eval(args) -> dict:
    decomp = _decomposition(args)
    settings = MeasurementSettings.from_angles(_angles(args.angles, args.degrees), args.mode or "plane")
    return {"decomposition": decomp.label, **evaluate_eq6(decomp, settings).to_dict()}


def cmd_optimize(args) -> dict:
    decomp = _decomposition(args)
    return maximize_violation(decomp, _optimizer_config(args)).to_dict()


def cmd_sample(args) -> dict:
    state = _state(args)
    mode = args.mode or "plane"
    first = _observable(_angles(args.first, args.degrees), mode)
    second = _observable(_angles(args.second, args.degrees), mode)
    est = sample_correlation(state, first, second, args.trials, args.seed, jobs=args.jobs)
    return {**est.to_dict(), "analytic": correlation(state, first, second)}


def cmd_concurrence(args) -> dict:
    return {"concurrence": concurrence(_state(args))}


def cmd_validate(args) -> dict:
    decomp = _decomposition(args)
    return {"decomposition": decomp.label, **validate_decomposition(decomp).to_dict()}


def cmd_export(args) -> dict:
    if args.what == "state":
        return state_to_dict(_state(args))
    return decomposition_to_dict(_decomposition(args))


def cmd_sweep(args):
    spec = SweepSpec.from_preset(
        args.preset,
        optimizer=_optimizer_config(args),
        output_path=args.out,
        json_path=args.json,
    )
    rows = run_sweep(spec, jobs=args.jobs)
    if args.out:
        return {"preset": spec.preset, "rows": len(rows), "csv": args.out, "json": args.json}
    if args.csv:
        return rows_to_csv(spec, rows)
    return {"preset": spec.preset, "rows": [{"family": r.family, "params": r.params, **r.result} for r in rows]}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellvar", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate <B> at given settings")
    _add_source(p)
    p.add_argument("--angles", type=_floats, required=True, help="a,b,c,d (radians; 8 values in bloch mode)")
    p.add_argument("--mode", choices=["plane", "bloch"])
    p.add_argument("--degrees", action="store_true", help="angles are given in degrees")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="maximize <B> over settings")
    _add_source(p)
    _add_optimizer(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="run a figure preset and write CSV")
    p.add_argument("--preset", choices=sorted(PRESETS), required=True)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--json", help="JSON sidecar path with full reports")
    p.add_argument("--csv", action="store_true", help="print CSV instead of JSON when --out is absent")
    p.add_argument("--jobs", type=int, default=_default_jobs())
    _add_optimizer(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sample", help="Monte Carlo estimate of a correlation")
    _add_source(p)
    p.add_argument("--first", type=_floats, required=True, help="theta, or polar,azimuth in bloch mode")
    p.add_argument("--second", type=_floats, required=True)
    p.add_argument("--mode", choices=["plane", "bloch"])
    p.add_argument("--degrees", action="store_true")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("concurrence", help="Wootters concurrence of the state")
    _add_source(p)
    p.set_defaults(func=cmd_concurrence)

    p = sub.add_parser("validate", help="check a decomposition against its state")
    _add_source(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export", help="write a built-in state or decomposition as JSON")
    _add_source(p)
    p.add_argument("what", choices=["state", "decomposition"])
    p.set_defaults(func=cmd_export)

    for name in ("eval", "optimize", "sample", "concurrence", "validate", "export"):
        sub.choices[name].add_argument("--out", help="write JSON here instead of stdout")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except (DomainError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"bellvar {args.command}: error: {exc}", file=sys.stderr)
        return 1

    if isinstance(result, str):
        sys.stdout.write(result)
        return 0
    text = json.dumps(result, indent=2)
    out = getattr(args, "out", None)
    if out and args.command != "sweep":
        try:
            Path(out).write_text(text + "\n")
        except OSError as exc:
            print(f"bellvar {args.command}: error: cannot write {out}: {exc}", file=sys.stderr)
            return 1
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
