"""Command-line entry point: ``ccnls <subcommand> [--config f] [--set k=v] ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .report import ReportError, RunManifest, emit_report, find_seeds, override_seeds
from .solver import InstabilityError
from .studies import SUBCOMMANDS, resolve, run_study, validate
from .system import ParameterError

EXIT_OK, EXIT_PARAM, EXIT_INSTABILITY, EXIT_ASSERT = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARAM)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ccnls", description="Pseudospectral simulator and numerical lab.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS, metavar="subcommand",
                    help="one of: " + ", ".join(SUBCOMMANDS))
    ap.add_argument("--config", help="JSON file with parameters")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override one parameter; VALUE is parsed as JSON when possible; "
                         "dotted keys reach nested fields")
    ap.add_argument("--out", default="runs", help="output root directory")
    ap.add_argument("--assert", dest="assert_", action="store_true",
                    help="exit 4 when the acceptance band is violated")
    ap.add_argument("--dry-run", action="store_true", help="validate parameters and stop")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes")
    ap.add_argument("--figures", action=argparse.BooleanOptionalAction, default=False,
                    help="also render PNG figures next to the CSV files")
    return ap


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_set(params: dict, item: str) -> dict:
    if "=" not in item:
        raise ParameterError(f"--set expects KEY=VALUE, got {item!r}")
    key, value = item.split("=", 1)
    node = params
    *path, leaf = key.strip().split(".")
    for k in path:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ParameterError(f"{key} does not name a nested field")
    node[leaf] = _parse_value(value)
    return params


def load_params(args) -> dict:
    params: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                params = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read config: {exc}") from exc
        if "subcommand" in params and "params" in params:   # a manifest
            params = params["params"]
    for item in args.set:
        apply_set(params, item)
    env = os.environ.get("CCNLS_SEED")
    if env is not None:
        try:
            params = override_seeds(resolve(args.subcommand, params), int(env))
        except ValueError as exc:
            raise ParameterError(f"CCNLS_SEED must be an integer: {exc}") from exc
    return params


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    sub = args.subcommand
    try:
        if args.jobs < 1:
            raise ParameterError("--jobs must be at least 1")
        P = resolve(sub, load_params(args))
        validate(sub, P)
        if args.dry_run:
            print(f"{sub}: parameters ok")
            return EXIT_OK
        out = run_study(sub, P, jobs=args.jobs)
    except ParameterError as exc:
        print(f"{sub}: parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (ValueError, TypeError, KeyError) as exc:
        print(f"{sub}: parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except InstabilityError as exc:
        print(f"{sub}: numerical instability at step {exc.step} (t={exc.t:g})", file=sys.stderr)
        return EXIT_INSTABILITY
    manifest = RunManifest(sub, P, find_seeds(P))
    try:
        d = emit_report(out, manifest, args.out, figures=args.figures)
    except ReportError as exc:
        print(f"{sub}: {exc}", file=sys.stderr)
        return EXIT_PARAM
    verdict = "pass" if out.passed else "FAIL"
    print(f"{sub}: {out.message} [{verdict}] -> {d}")
    if args.assert_ and not out.passed:
        return EXIT_ASSERT
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
