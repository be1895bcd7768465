"""vodsim command line: run and validate scenario files."""
from __future__ import annotations

import argparse
import sys

from .scenarios import ScenarioError, preset_names, resolve, run_scenario, validate_scenario

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def _cmd_run(args) -> int:
    path = resolve(args.scenario)
    try:
        results = run_scenario(path, args.out, seed=args.seed, jobs=args.jobs, fmt=args.format,
                               check=True if args.check else None)
    except ScenarioError as exc:
        for p in exc.problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for r in results:
        if r.metrics is not None:
            m = r.metrics
            modal = m.modal_hop()
            print(f"[ok] {r.name:28s} requests={m.requests} hit_ratio={m.hit_ratio:.3f} "
                  f"served={m.served} modal_hop={modal} score={m.score}")
        else:
            print(f"[ok] {r.name:28s} points={len(r.cluster_series)}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        problems = validate_scenario(resolve(args.scenario))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for p in problems:
        print(p)
    return EXIT_INVALID if problems else EXIT_OK


def _cmd_presets(args) -> int:
    for name in preset_names():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vodsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file or shipped preset")
    p.add_argument("scenario", help="path to a scenario JSON file, or a preset name")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override every seed in the file")
    p.add_argument("--jobs", type=int, default=1, help="run sweep points in parallel")
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")
    p.add_argument("--check", action="store_true",
                   help="assert request conservation and B(s) <= C(s) after every tick")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("validate", help="report constraint violations without running")
    p.add_argument("scenario")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("presets", help="list shipped presets")
    p.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
