"""Command line interface.

Exit codes: 0 success, 1 configuration/validation problem (or a failing
check), 2 numerical instability detected, 3 snapshot/file I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .checks import CHECK_NAMES, run_checks
from .errors import ConfigError, NumericalInstabilityError, SnapshotIOError
from .runner import run
from .scenarios import RECIPE_NAMES, RECIPE_SUMMARIES, scenario_from_dict

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_UNSTABLE = 2
EXIT_IO = 3


def _apply_override(config: dict, spec: str) -> None:
    if "=" not in spec:
        raise ConfigError(f"override {spec!r} must look like key.path=value")
    path, raw = spec.split("=", 1)
    keys = [k for k in path.split(".") if k]
    if not keys:
        raise ConfigError(f"override {spec!r} has an empty key path")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings may be given unquoted
    node = config
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override {path}: {key} does not hold an object")
    node[keys[-1]] = value


def _cmd_run(args) -> int:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    for override in args.override:
        _apply_override(config, override)
    scenario = scenario_from_dict(config, base=path.parent)
    result = run(scenario, args.outdir)
    print(f"{result.run_dir}: {len(result.manifest['outputs'])} outputs, "
          f"{result.manifest['n_steps']} steps")
    return EXIT_OK


def _cmd_check(args) -> int:
    if args.list:
        for name in CHECK_NAMES:
            print(name)
        return EXIT_OK
    results = run_checks(args.only or None)
    for result in results:
        print(result.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_CONFIG


def _cmd_scenario(args) -> int:
    if args.scenario_command == "list":
        for name in RECIPE_NAMES:
            print(f"{name}: {RECIPE_SUMMARIES[name]}")
        return EXIT_OK
    raise ConfigError(f"unknown scenario command {args.scenario_command!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diracfluid",
        description="Two-spinor Dirac/Klein-Gordon evolution and the "
                    "spinor-to-relativistic-fluid map, with built-in checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario config and write its artifacts")
    run_p.add_argument("--config", required=True, help="path to a scenario JSON file")
    run_p.add_argument("--outdir", default="runs", help="output root (default: ./runs)")
    run_p.add_argument("--override", action="append", default=[],
                       metavar="KEY.PATH=VALUE",
                       help="override a config entry (JSON-parsed value); repeatable")

    check_p = sub.add_parser("check", help="run the built-in verification suite")
    check_p.add_argument("--only", action="append", default=[], choices=CHECK_NAMES,
                         help="run only the named check; repeatable")
    check_p.add_argument("--list", action="store_true", help="list check names and exit")

    scen_p = sub.add_parser("scenario", help="scenario utilities")
    scen_sub = scen_p.add_subparsers(dest="scenario_command", required=True)
    scen_sub.add_parser("list", help="list the initial-data recipes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "check":
            return _cmd_check(args)
        return _cmd_scenario(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInstabilityError as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except SnapshotIOError as exc:
        print(f"snapshot I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
