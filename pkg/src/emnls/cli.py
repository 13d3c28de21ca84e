"""Command-line entry point: ``emnls <subcommand> [options]``.

Exit codes: 0 success, 2 invalid input, 3 verification failure,
4 indeterminate classification. Output files go under ``--out``, else
``$EMNLS_OUTPUT_ROOT``, else ``./runs``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SUITE_FAILED = 3
EXIT_INDETERMINATE = 4
OUTPUT_ENV = "EMNLS_OUTPUT_ROOT"

log = logging.getLogger("emnls")


class UsageError(Exception):
    pass


def output_root(arg=None):
    return Path(arg or os.environ.get(OUTPUT_ENV) or "runs")


def _json_arg(text, what):
    """Inline JSON or a path to a JSON file."""
    if text is None:
        return None
    if os.path.isfile(text):
        with open(text) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what}: malformed JSON ({exc})") from None


def _dump(obj, path=None):
    from .verify import report_json

    text = report_json(obj)
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    sys.stdout.write(text)


def _bundle(args):
    from .groundstate import GroundStateBundle, ground_state

    if getattr(args, "bundle", None):
        return GroundStateBundle.load(args.bundle)
    return ground_state(args.n, args.p)


# ---------------------------------------------------------------- subcommands

def cmd_ground_state(args):
    b = _bundle(args)
    tag = f"ground-state-n{args.n}-p{args.p:g}"
    root = output_root(args.out)
    root.mkdir(parents=True, exist_ok=True)
    json_path, csv_path = b.save(root / f"{tag}.json", root / f"{tag}.csv")
    out = b.scalars()
    out["files"] = {"json": str(json_path), "csv": str(csv_path)}
    _dump(out)
    return EXIT_OK


def cmd_classify(args):
    from .evolution import build_initial, build_potential
    from .functionals import classify
    from .grid import make_grid
    from .potentials import estimate_constants

    b = _bundle(args)
    params = b.params
    spec = _json_arg(args.initial, "--initial") or {"kind": "soliton", "scale": args.scale}
    grid = make_grid(params.n, args.grid, args.L)
    if params.n == 3:
        pot = build_potential(_json_arg(args.potential, "--potential"),
                              _json_arg(args.electric, "--electric"))
    elif args.potential or args.electric:
        raise UsageError("potentials are available for n = 3 only")
    else:
        from .potentials import zero_potential
        pot = zero_potential(params.n)
    u0 = build_initial(spec, grid, b, boundary_tol=args.boundary_tol)
    consts = None
    if pot.electric is not None:
        consts = estimate_constants(pot, None, params, b)
    cl = classify(u0, pot, consts, b)
    out = cl.to_dict()
    out["initial"] = spec
    _dump(out, args.save)
    return EXIT_INDETERMINATE if cl.indeterminate else EXIT_OK


def cmd_simulate(args):
    from .evolution import SimConfig, simulate, write_diagnostics_csv
    from .grid import save_field

    data = _json_arg(args.config, "--config") if args.config else {}
    if not isinstance(data, dict):
        raise UsageError("config: top level must be a JSON object")
    overrides = {"n": args.n, "p": args.p, "grid_points": args.grid, "half_width": args.L,
                 "dt": args.dt, "t_end": args.t_end, "seed": args.seed, "name": args.name}
    data.update({k: v for k, v in overrides.items() if v is not None})
    cfg = SimConfig.from_dict(data)
    run_dir = output_root(args.out) / cfg.name
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    t0 = time.perf_counter()
    traj = simulate(cfg, keep_field=args.save_field)
    write_diagnostics_csv(traj, run_dir / "diagnostics.csv")
    summary = traj.summary()
    summary["wall_time_s"] = round(time.perf_counter() - t0, 3)
    summary["files"] = {"config": "config.json", "diagnostics": "diagnostics.csv"}
    if args.save_field and traj.final_field is not None:
        save_field(run_dir / "final_field.bin", traj.final_field)
        summary["files"]["final_field"] = "final_field.bin"
    _dump(summary, run_dir / "summary.json")
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_all, run_suite

    if args.suite == "all":
        report = run_all(args.seed, workers=args.workers)
    else:
        report = run_suite(args.suite, args.seed)
    _dump(report, args.save)
    return EXIT_OK if report["passed"] else EXIT_SUITE_FAILED


def cmd_potential_report(args):
    from .evolution import build_potential
    from .potentials import potential_report

    b = _bundle(args)
    pot = build_potential(_json_arg(args.potential, "--potential"), _json_arg(args.electric, "--electric"))
    _dump(potential_report(pot, pot.electric, b.params, b), args.save)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=3, help="spatial dimension (default 3)")
    common.add_argument("--p", type=float, default=3.0, help="nonlinearity exponent (default 3)")
    common.add_argument("--out", help=f"output root (default ${OUTPUT_ENV} or ./runs)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    lattice = argparse.ArgumentParser(add_help=False)
    lattice.add_argument("--grid", type=int, default=64, help="points per axis (power of two)")
    lattice.add_argument("--L", type=float, default=8.0, help="box half-width")

    ap = argparse.ArgumentParser(prog="emnls", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    gs = sub.add_parser("ground-state", parents=[common], help="solve for the ground state and save it")
    gs.add_argument("--bundle", help=argparse.SUPPRESS)
    gs.set_defaults(func=cmd_ground_state)

    cl = sub.add_parser("classify", parents=[common, lattice], help="place initial data in R1/R2")
    cl.add_argument("--bundle", help="ground-state JSON written by ground-state")
    cl.add_argument("--initial", help="initial-data spec (JSON text or file)")
    cl.add_argument("--scale", type=float, default=1.0, help="soliton scale when --initial is absent")
    cl.add_argument("--potential", help="magnetic potential spec (JSON)")
    cl.add_argument("--electric", help="electric potential spec (JSON)")
    cl.add_argument("--boundary-tol", type=float, default=1e-2)
    cl.add_argument("--save", help="also write the JSON report here")
    cl.set_defaults(func=cmd_classify)

    sm = sub.add_parser("simulate", help="run a simulation config")
    sm.add_argument("config", nargs="?", help="config JSON (file or text)")
    sm.add_argument("--n", type=int)
    sm.add_argument("--p", type=float)
    sm.add_argument("--grid", type=int)
    sm.add_argument("--L", type=float)
    sm.add_argument("--dt", type=float)
    sm.add_argument("--t-end", type=float)
    sm.add_argument("--seed", type=int)
    sm.add_argument("--name", help="run directory name")
    sm.add_argument("--out", help=f"output root (default ${OUTPUT_ENV} or ./runs)")
    sm.add_argument("--save-field", action="store_true", help="dump the final field")
    sm.add_argument("-v", "--verbose", action="store_true")
    sm.set_defaults(func=cmd_simulate)

    vf = sub.add_parser("verify", parents=[common], help="run a named verification suite or 'all'")
    vf.add_argument("suite")
    vf.add_argument("--workers", type=int, default=1)
    vf.add_argument("--save", help="also write the JSON report here")
    vf.set_defaults(func=cmd_verify)

    pr = sub.add_parser("potential-report", parents=[common], help="norms and constants of a potential")
    pr.add_argument("--potential", default='{"kind": "zero"}', help="magnetic potential spec (JSON)")
    pr.add_argument("--electric", help="electric potential spec (JSON)")
    pr.add_argument("--save", help="also write the JSON report here")
    pr.add_argument("--bundle", help="ground-state JSON written by ground-state")
    pr.set_defaults(func=cmd_potential_report)
    return ap


def main(argv=None):
    from .evolution import ConfigError
    from .groundstate import GroundStateError
    from .verify import UnknownSuiteError

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UnknownSuiteError as exc:
        print(f"emnls: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConfigError as exc:
        print(f"emnls: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (UsageError, ValueError, FileNotFoundError, GroundStateError) as exc:
        print(f"emnls: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
