"""``ttdbf`` command line.

Exit status: 0 on success, 2 when the scenario or arguments are invalid,
3 when at least one solver run stopped before meeting its tolerance (the
rows are still written, flagged ``converged=false``).
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import experiments, scenario
from .config import PRESETS, linear_to_db, watts_to_dbm

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3

SWEEPS = {"sweep-angle": "angle", "sweep-power": "transmit_power",
          "sweep-tmax": "t_max", "sweep-loss": "insertion_loss"}
AXIS_NAMES = {"angle": "user direction", "transmit_power": "transmit power",
              "t_max": "maximum TTD delay", "insertion_loss": "insertion loss"}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--scenario", help="YAML scenario file")
    p.add_argument("--preset", choices=sorted(PRESETS), default="desk",
                   help="parameter preset when no scenario is given (default: desk)")
    p.add_argument("--seed", type=int, help="seed base (overrides the scenario)")
    p.add_argument("--out", help="output CSV (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ttdbf", description="TTD hybrid beamforming experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, axis in SWEEPS.items():
        p = sub.add_parser(name, help=f"Monte Carlo sweep over {AXIS_NAMES[axis]}")
        _common(p)
        p.add_argument("--trace", metavar="PATH",
                       help="write per-iteration solver traces (objective, xi, rho) here")
        p.add_argument("--realizations", type=int, help="override the realization count")
        p.add_argument("--workers", type=int, help="worker processes (default: CPU count)")
        p.add_argument("--quiet", action="store_true", help="no progress or summary on stderr")
    p = sub.add_parser("single-user-design", help="closed-form single-user designs vs angle")
    _common(p)
    p.add_argument("--distance", type=float, help="user distance in metres (default 10)")
    p.add_argument("--angle-step", type=float, default=5.0, help="degrees (default 5)")
    p.add_argument("--t-max-ps", type=float, help="delay range in ps (default from config)")
    p.add_argument("--trace", help=argparse.SUPPRESS)
    p = sub.add_parser("validate", help="check a scenario and print its normalised form")
    p.add_argument("--scenario", required=True)
    return ap


def _report(diags, source):
    for d in diags:
        print(f"{source}: {d}", file=sys.stderr)


def _load(args, axis=None):
    if args.scenario:
        c = scenario.load(args.scenario)
        if axis is not None and c.axis != axis:
            raise scenario.ScenarioError(
                [scenario.Diagnostic("campaign.axis",
                                     f"scenario sweeps {c.axis}, this command sweeps {axis}")],
                args.scenario)
        return c
    return scenario.preset_campaign(axis or "angle", args.preset)


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _label(axis, value) -> str:
    if axis == "angle":
        return f"theta={math.degrees(value):g} deg"
    if axis == "transmit_power":
        return f"P_t={watts_to_dbm(value):g} dBm"
    if axis == "t_max":
        return f"t_max={value * 1e12:g} ps"
    return f"eta={linear_to_db(value):.3g} dB"


def _sweep(args, axis) -> int:
    c = _load(args, axis)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.realizations is not None:
        if args.realizations < 1:
            raise scenario.ScenarioError(
                [scenario.Diagnostic("--realizations", "must be at least 1")])
        changes["n_realizations"] = args.realizations
    if args.workers is not None and args.workers < 1:
        raise scenario.ScenarioError([scenario.Diagnostic("--workers", "must be at least 1")])
    if changes:
        c = c.with_(**changes)
    out = args.out or c.output

    progress = None
    if not args.quiet and sys.stderr.isatty():
        def progress(done, total):
            print(f"\r{done}/{total} units", end="" if done < total else "\n",
                  file=sys.stderr, flush=True)
    res = experiments.run_campaign(c, workers=args.workers, trace=bool(args.trace),
                                   progress=progress)
    if out:
        res.write(out, args.trace)
    else:
        sys.stdout.write(res.csv_text())
        if args.trace:
            with open(args.trace, "w", newline="") as fh:
                fh.write(experiments._csv(res.trace, experiments.TRACE_FIELDS))
    if not args.quiet:
        for s in res.summary:
            flag = f"  ({s['n_nonconverged']} not converged)" if s["n_nonconverged"] else ""
            eq = "" if s["equalized"] else " w/o eq."
            print(f"{_label(axis, s['value'])}  {s['scheme']:<13}{eq} "
                  f"{s['mean_rate_bps_hz']:.4f} +/- {s['se_rate_bps_hz']:.4f}{flag}",
                  file=sys.stderr)
    if res.n_nonconverged:
        print(f"warning: {res.n_nonconverged} solver runs did not converge",
              file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _single_user(args) -> int:
    if args.scenario:
        c = scenario.load(args.scenario)
        cfg, distance = c.system, c.distance
        angles = [math.degrees(a) for a in c.grid] if c.axis == "angle" else None
    else:
        cfg, distance, angles = PRESETS[args.preset](), 10.0, None
    if args.distance is not None:
        if not args.distance > 0:
            raise scenario.ScenarioError([scenario.Diagnostic("--distance", "must be positive")])
        distance = args.distance
    if angles is None:
        if not 0 < args.angle_step <= 180:
            raise scenario.ScenarioError(
                [scenario.Diagnostic("--angle-step", "must lie in (0, 180]")])
        angles = np.round(np.arange(0.0, 180.0 + 1e-9, args.angle_step), 9)
    t_max = None if args.t_max_ps is None else args.t_max_ps * 1e-12
    if t_max is not None and t_max < 0:
        raise scenario.ScenarioError([scenario.Diagnostic("--t-max-ps", "must be non-negative")])
    rows = experiments.single_user_table(cfg, distance, angles, t_max=t_max)
    _emit(experiments.single_user_csv(rows), args.out)
    return EXIT_OK


def _validate(args) -> int:
    c, diags = scenario.validate_scenario(args.scenario)
    if diags:
        _report(diags, args.scenario)
        return EXIT_INVALID
    sys.stdout.write(c.dump())
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        if args.command == "validate":
            return _validate(args)
        if args.command == "single-user-design":
            return _single_user(args)
        return _sweep(args, SWEEPS[args.command])
    except scenario.ScenarioError as exc:
        _report(exc.diagnostics, exc.source or "arguments")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
