"""Command-line front end.

Exit codes: 0 all claims pass, 1 a claim failed, 2 bad config,
3 the simulation or interface tracking aborted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness, interface, stepper
from .config import ConfigError, load
from .model import ScenarioError

EXIT_OK, EXIT_CLAIM, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3


def _write_reports(reports, out: Path | None, name: str = "report.json") -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "tolerances": harness.TOLERANCES.as_dict(),
        "claims": [r.record() for r in reports],
    }
    (out / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _print_reports(reports) -> int:
    for r in reports:
        print(r.line())
    return EXIT_OK if harness.all_passed(reports) else EXIT_CLAIM


def cmd_run(args) -> int:
    sc = load(args.config)
    traj = stepper.run(sc)
    reports = harness.verify(traj, formulas=False)
    print(f"steps={traj.n_steps} frames={len(traj.frames)} t_end={traj.times[-1]:g}")
    if args.out is not None:
        pair = interface.integrate_interfaces(traj, *sc.hole) if sc.hole is not None else None
        harness.emit_plots(traj, args.out, pair)
        _write_reports(reports, args.out)
    return _print_reports(reports)


def cmd_verify(args) -> int:
    sc = load(args.config)
    if sc.exploratory:
        print("note: q < 2m, outside the range the estimates cover")
    traj = stepper.run(sc)
    reports = harness.verify(traj)
    _write_reports(reports, args.out)
    return _print_reports(reports)


def cmd_sweep(args) -> int:
    sc = load(args.config)
    try:
        rep = harness.sweep_epsilon(sc, args.eps, workers=args.workers)
    except harness.SweepError as exc:
        print(f"sweep failed: {exc}", file=sys.stderr)
        return EXIT_ABORT
    print(f"{'epsilon':>10} {'lipschitz_sup':>14} {'vacuum_max':>12} {'cone_drift':>12}")
    for row in rep.rows:
        print(f"{row.epsilon:>10.6g} {row.lipschitz_sup:>14.6g} {row.vacuum_max:>12.6g} {row.cone_drift:>12.6g}")
    reports = [rep.report] + ([rep.vacuum_report] if rep.vacuum_report else [])
    _write_reports(reports, args.out, "sweep.json")
    return _print_reports(reports)


def cmd_converge(args) -> int:
    sc = load(args.config)
    rep = harness.convergence_study(sc, args.n, workers=args.workers)
    print(f"{'N':>6} {'l1_diff':>12} {'cone_drift':>12} {'pme_error':>12}")
    for i, n in enumerate(rep.sizes):
        diff = rep.l1_differences[i] if i < len(rep.l1_differences) else float("nan")
        print(f"{n:>6d} {diff:>12.6g} {rep.cone_drifts[i]:>12.6g} {rep.pme_errors[i]:>12.6g}")
    _write_reports(rep.reports, args.out, "convergence.json")
    return _print_reports(rep.reports)


def cmd_plots(args) -> int:
    sc = load(args.config)
    traj = stepper.run(sc)
    pair = interface.integrate_interfaces(traj, *sc.hole) if sc.hole is not None else None
    files = harness.emit_plots(traj, args.out, pair)
    print(f"wrote {len(files)} files to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ks1d", description="1D degenerate Keller-Segel solver and claim checker")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a scenario and check trajectory claims")
    p.add_argument("config")
    p.add_argument("--out", type=Path, default=None, help="directory for CSVs and report.json")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="integrate and check every applicable claim")
    p.add_argument("config")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep-eps", help="epsilon-uniformity sweep")
    p.add_argument("config")
    p.add_argument("--eps", type=float, nargs="+", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("converge", help="grid convergence study")
    p.add_argument("config")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("plots", help="write per-frame CSVs and a gnuplot script")
    p.add_argument("config")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_plots)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScenarioError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # bad sweep or size lists
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (stepper.SimulationAborted, interface.InterfaceEscape) as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
