"""``friendswarm`` command line.

Exit codes: 0 success, 1 invalid configuration, 2 simulation or analysis
failure, 3 file I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .analysis import classify
from .config import RunConfig, SweepConfig, load_config
from .errors import ConfigError, SwarmError
from .render import render_filmstrip, render_snapshot
from .runner import execute_run, report, run_sweep
from .trajectory import read_trajectory

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3

# flag name -> dotted config key
RUN_FLAGS = {
    "mode": "mode",
    "duration": "duration",
    "dt": "dt",
    "method": "method",
    "seed": "seed",
    "sample_every": "sample_every",
    "noise_sigma": "hardware.noise_sigma",
    "render": "output.render",
}


def _overrides(args) -> dict:
    return {key: getattr(args, flag) for flag, key in RUN_FLAGS.items() if getattr(args, flag, None) is not None}


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["ideal", "hardware"])
    p.add_argument("--duration", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--method", choices=["euler", "rk4"])
    p.add_argument("--seed", type=int)
    p.add_argument("--sample-every", dest="sample_every", type=int)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float)
    p.add_argument("--render", choices=["none", "snapshot", "filmstrip"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="friendswarm", description="Non-reciprocal swarm simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (overrides output.dir)")
    _add_run_flags(p)

    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int)
    _add_run_flags(p)

    p = sub.add_parser("classify", help="classify an existing trajectory file")
    p.add_argument("--traj", required=True)

    p = sub.add_parser("render", help="render a trajectory file to SVG")
    p.add_argument("--traj", required=True)
    p.add_argument("--mode", choices=["snapshot", "filmstrip"], default="snapshot")
    p.add_argument("--out", required=True)
    p.add_argument("--time", type=float, help="snapshot time (default: last sample)")
    p.add_argument("--panels", type=int, default=6)
    p.add_argument("--trail", type=float, default=5.0)
    return parser


def _dispatch(args) -> int:
    if args.command in ("simulate", "sweep"):
        cfg = load_config(args.config, _overrides(args))
        if args.command == "simulate":
            if not isinstance(cfg, RunConfig):
                raise ConfigError("this document has a [sweep] section; use the sweep command", key="sweep")
            rep = execute_run(cfg, args.out)
            print(f"{rep['label']}  (scenario {rep['meta'].get('scenario')}, mode {rep['meta'].get('mode')})")
        else:
            if not isinstance(cfg, SweepConfig):
                raise ConfigError("sweep command needs a [sweep] section", key="sweep")
            if args.jobs is not None and args.jobs < 1:
                raise ConfigError("must be >= 1", key="jobs")
            rows = run_sweep(cfg, args.out, args.jobs)
            print(f"{len(rows)} cells written to {args.out}")
        return EXIT_OK

    traj = read_trajectory(args.traj)
    if args.command == "classify":
        print(json.dumps(report(traj, classify(traj)), indent=2, sort_keys=True))
    elif args.mode == "snapshot":
        render_snapshot(traj, args.out, time=args.time, trail=args.trail)
    else:
        render_filmstrip(traj, args.out, panels=args.panels, trail=args.trail)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SwarmError, ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
