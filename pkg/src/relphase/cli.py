"""Command-line front end: ``relphase run | validate | list-scenarios``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import __version__
from .config import FORMATS, ConfigError, emit_config, load_config
from .scenarios import (
    ENV_OUTPUT_DIR,
    EXIT_CONFIG,
    EXIT_OK,
    describe_scenarios,
    run_scenario,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relphase",
        description="Coherence functionals of filter histories and their phase-space form.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config and write results plus a manifest")
    run.add_argument("config", help="scenario configuration file")
    run.add_argument("--output-dir", default=None,
                     help=f"root directory for run outputs (default: ${ENV_OUTPUT_DIR} or ./runs)")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--format", choices=FORMATS, default=None, help="override the table format")
    run.add_argument("--tolerance-scale", type=float, default=1.0,
                     help="multiply every assertion tolerance by this factor")
    run.add_argument("-q", "--quiet", action="store_true", help="print only the status line")

    val = sub.add_parser("validate", help="parse a config and print it with defaults resolved")
    val.add_argument("config")

    sub.add_parser("list-scenarios", help="list the available scenarios")
    return parser


def _load(path: str):
    try:
        return load_config(path), None
    except ConfigError as exc:
        return None, exc


def _report_errors(path: str, exc: ConfigError) -> int:
    for issue in exc.issues:
        print(f"{path}: {issue}", file=sys.stderr)
    return EXIT_CONFIG


def cmd_run(args: argparse.Namespace) -> int:
    cfg, err = _load(args.config)
    if err is not None:
        return _report_errors(args.config, err)
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            print(f"{args.config}: seed must be in [0, 2^64)", file=sys.stderr)
            return EXIT_CONFIG
        cfg.seed = args.seed
    if args.format is not None:
        cfg.output = dataclasses.replace(cfg.output, format=args.format)
    if not args.tolerance_scale > 0:
        print("--tolerance-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    text = Path(args.config).read_text(encoding="utf-8")
    try:
        out = run_scenario(cfg, args.output_dir, tolerance_scale=args.tolerance_scale, config_text=text)
    except Exception as exc:  # engine-side refusal of a config that parsed
        print(f"{args.config}: run aborted: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    res = out.result
    if not args.quiet:
        for c in res.checks:
            mark = "PASS" if c.passed else "FAIL"
            print(f"{mark}  {c.name:<28} value={c.value:.3e}  limit={c.limit:.3e}  {c.note}".rstrip())
    status = "ok" if out.exit_code == EXIT_OK else "FAILED"
    print(f"{cfg.scenario}: {status} -> {out.run_dir}")
    return out.exit_code


def cmd_validate(args: argparse.Namespace) -> int:
    cfg, err = _load(args.config)
    if err is not None:
        return _report_errors(args.config, err)
    sys.stdout.write(emit_config(cfg))
    return EXIT_OK


def cmd_list(args: argparse.Namespace) -> int:
    items = describe_scenarios()
    w = max(len(n) for n, _ in items)
    for name, desc in items:
        print(f"{name.ljust(w)}  {desc}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "validate": cmd_validate, "list-scenarios": cmd_list}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
