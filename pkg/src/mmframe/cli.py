"""Command-line entry point: ``mmframe <verb> <scenario> [options]``.

Exit status is 0 on success, 2 when the scenario or the arguments fail
validation, 1 on any other runtime error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from .experiments import SweepError, SweepSpec, parse_values, run_experiment
from .scenario import ScenarioError, list_templates, load_scenario, load_template

__all__ = ["main", "build_parser", "resolve_scenario"]


def resolve_scenario(ref: str):
    """Load a scenario file, or a bundled template when no such file exists."""
    p = Path(ref)
    if not p.exists() and ref in list_templates():
        return load_template(ref)
    return load_scenario(p)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario file, or the name of a bundled template")
    common.add_argument("--seed", type=int, help="override the scenario's Monte Carlo / simulation seed")
    common.add_argument("--out", default="mmframe-out", help="output directory (default: %(default)s)")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="format of the summary printed to stdout")

    ap = argparse.ArgumentParser(prog="mmframe",
                                 description="Control overhead and utilization of mmWave frame designs.")
    ap.add_argument("--list-templates", action="store_true", help="list bundled scenarios and exit")
    sub = ap.add_subparsers(dest="verb")
    sub.add_parser("validate", parents=[common], help="parse and check a scenario")
    p = sub.add_parser("overhead", parents=[common], help="control overhead (Table II, or a sweep)")
    p.add_argument("--sweep", help="name=values, e.g. n_ue=1:64")
    p = sub.add_parser("utilization", parents=[common], help="utilization in both TTI modes")
    p.add_argument("--sweep", help="name=values (default t_tti_max_symbols over 4..100)")
    p.add_argument("--workers", type=int, default=1, help="parallel sweep points")
    p = sub.add_parser("simulate", parents=[common], help="symbol-level simulation")
    p.add_argument("--duration", type=float, help="seconds (default from the scenario)")
    p.add_argument("--trace", action="store_true", help="also write the per-symbol trace CSV")
    p.add_argument("--sweep", help="name=values, one run per value")
    p = sub.add_parser("rrc", parents=[common], help="background throughput versus RRC message rate")
    p.add_argument("--rates", help="messages per second per UE, e.g. 0,250,500 or 0:1250:250")
    p.add_argument("--duration", type=float)
    p = sub.add_parser("snr", parents=[common], help="DL/UL SNR distributions")
    p.add_argument("--samples", type=int, help="Monte Carlo draws")
    return ap


def _emit(rows, fmt, stream):
    if not rows:
        return
    if fmt == "json":
        stream.write(json.dumps(rows, indent=2, default=str) + "\n")
        return
    w = csv.DictWriter(stream, fieldnames=list(rows[0].keys()), extrasaction="ignore")
    w.writeheader()
    w.writerows(rows)


def _read_rows(path: Path):
    with path.open(encoding="utf-8") as f:
        return list(csv.DictReader(line for line in f if not line.startswith("#")))


def _run(args, out):
    sc = resolve_scenario(args.scenario)
    if args.seed is not None:
        sc = sc.replace(monte_carlo=replace(sc.monte_carlo, seed=args.seed))
    if args.verb == "validate":
        rows = [{"scenario": sc.name, "hash": sc.hash, "arch": sc.arch.label(),
                 "tti_mode": sc.frame.tti_mode.value, "tti_symbols": sc.frame.tti_symbols,
                 "t_sym_us": sc.frame.t_sym * 1e6, "n_ue": sc.n_ue, "traffic": sc.traffic.kind}]
        _emit(rows, args.format, out)
        return 0

    kw = {}
    if args.verb == "rrc":
        sweep = SweepSpec("rrc", "rrc_rate", parse_values(args.rates)) if args.rates else SweepSpec("rrc")
        kw["duration"] = args.duration
    elif args.verb == "snr":
        sweep = SweepSpec("snr")
        kw["n_samples"] = args.samples
    else:
        sweep = SweepSpec.parse(args.verb, getattr(args, "sweep", None))
        if args.verb == "simulate":
            kw.update(duration=args.duration, trace=args.trace)
        if args.verb == "utilization":
            kw["workers"] = args.workers
    files = run_experiment(sc, sweep, args.out, seed=args.seed, **kw)

    txt = [f for f in files if f.suffix == ".txt"]
    for f in txt:
        out.write(f.read_text(encoding="utf-8"))
    summary = [f for f in files if f.suffix == f".{args.format}" and not f.name.startswith("trace")]
    if summary and not txt:
        f = summary[0]
        if f.suffix == ".csv":
            _emit(_read_rows(f), "csv", out)
        else:
            out.write(f.read_text(encoding="utf-8") + "\n")
    for f in files:
        print(f"wrote {f}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.list_templates:
        print("\n".join(list_templates()))
        return 0
    if args.verb is None:
        ap.print_help(sys.stderr)
        return 2
    try:
        return _run(args, sys.stdout)
    except ScenarioError as e:
        print(f"invalid scenario: {e}", file=sys.stderr)
        return 2
    except SweepError as e:
        print(f"invalid arguments: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # runtime failure of a model
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
