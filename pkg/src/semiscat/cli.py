"""Command line front end.

One process runs one or all experiments over a single validated config and
writes a CSV + JSON report per experiment.  Every acceptance check prints as
one [PASS]/[FAIL] line.  Exit codes: 0 all criteria passed, 1 at least one
criterion failed, 2 configuration error, 3 numerical failure.

Reports are byte-stable for a fixed config: reduction orders are fixed and
nothing in them depends on time, seeds, or thread count (--threads and the
optional THREADS environment override only change wall time).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .config import ConfigError, default_config, load_config, parse_config
from .experiments import EXPERIMENTS, run_experiment
from .integrate import NumericalError
from .reporting import emit_report

__all__ = ["main", "build_parser"]

EXPERIMENT_ORDER = ("jost-validate", "trace-sweep", "eigenfunction-check",
                    "waveop-sweep", "propagator-compare",
                    "nonautonomous-converge", "oracle-audit")

# keeps the threadpoolctl limiter alive for the process lifetime
_LIMITER = None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="semiscat",
        description="Verification experiments for semiclassical barrier "
                    "scattering with scale-dependent interface conditions.")
    p.add_argument("--config", metavar="PATH", default=None,
                   help="JSON config; defaults to the built-in full sweep "
                        "(or the bundled quickcheck with --quick)")
    p.add_argument("--experiment", metavar="NAME", default="all",
                   help="one of %s, or 'all' (default)"
                        % ", ".join(EXPERIMENT_ORDER))
    p.add_argument("--out", metavar="DIR", default="reports",
                   help="directory for the CSV/JSON reports (default: "
                        "reports)")
    p.add_argument("--threads", type=int, default=None, metavar="N",
                   help="cap the linear-algebra worker pool (wall time only, "
                        "never results); THREADS env is honored when unset")
    p.add_argument("--quick", action="store_true",
                   help="reduced sweeps for CI (also forced by configs with "
                        "quick=true)")
    return p


def bundled_quick_config():
    from importlib import resources

    text = (resources.files("semiscat") / "quickcheck.json").read_text(
        encoding="utf-8")
    return parse_config(json.loads(text))


def _resolve_config(args):
    if args.config is not None:
        cfg = load_config(args.config)
        if args.quick and not cfg.quick:
            cfg = dataclasses.replace(cfg, quick=True).validate()
    elif args.quick:
        cfg = bundled_quick_config()
    else:
        cfg = default_config()
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be a positive integer")
        cfg = dataclasses.replace(cfg, threads=args.threads).validate()
    return cfg


def _apply_thread_limit(threads) -> None:
    global _LIMITER
    if threads is None:
        env = os.environ.get("THREADS")
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(f"THREADS must be an integer, got {env!r}")
    if threads is None:
        return
    if threads < 1:
        raise ConfigError("thread count must be a positive integer")
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return
    _LIMITER = threadpool_limits(limits=threads)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        _apply_thread_limit(cfg.threads)
        if args.experiment == "all":
            names = EXPERIMENT_ORDER
        elif args.experiment in EXPERIMENTS:
            names = (args.experiment,)
        else:
            raise ConfigError(
                f"unknown experiment {args.experiment!r}; choose from "
                f"{', '.join(EXPERIMENT_ORDER)} or 'all'")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    failed = 0
    try:
        for name in names:
            report = run_experiment(name, cfg)
            csv_path, json_path = emit_report(report, args.out)
            print(f"== {name} ==")
            for crit in report.criteria:
                print(crit.line())
            failed += sum(not c.passed for c in report.criteria)
            print(f"rows: {len(report.rows)} -> {csv_path}")
    except NumericalError as exc:
        print(f"numerical failure in {name}: {exc}", file=sys.stderr)
        return 3
    if failed:
        print(f"{failed} criterion check(s) failed")
        return 1
    print("all criteria passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
