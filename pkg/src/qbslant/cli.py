"""Command line front end: ``qbslant verify | list-fixtures | dump-fixture``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .fixtures import REGISTRY, default_suite, get_fixture
from .manifest import CHECK_ORDER, ManifestError, load_manifest
from .report import emit, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _checks(text: str) -> list[str]:
    names = [c.strip() for c in text.split(",") if c.strip()]
    bad = [c for c in names if c not in CHECK_ORDER]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown check(s) {bad}; known: {', '.join(CHECK_ORDER)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qbslant", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run checks on a manifest or built-in fixture")
    v.add_argument("manifest", nargs="?", help="path to a JSON manifest")
    v.add_argument("--fixture", action="append", default=[],
                   help="built-in fixture, e.g. example_7_2 or slant_plane(0.7); repeatable")
    v.add_argument("--all-fixtures", action="store_true", help="run the built-in fixture suite")
    v.add_argument("--format", choices=("human", "machine"), default="human")
    v.add_argument("--seed", type=_seed, help="override the sampling seed")
    v.add_argument("--checks", type=_checks, help="comma-separated subset of checks")
    v.add_argument("--out", help="write the report here instead of stdout")
    v.add_argument("--workers", type=int, default=1, help="threads for per-point evaluation")
    v.add_argument("--timings", action="store_true", help="include wall-clock times (breaks byte-identity)")

    sub.add_parser("list-fixtures", help="print the fixture names")

    d = sub.add_parser("dump-fixture", help="print a fixture's manifest JSON")
    d.add_argument("name")
    d.add_argument("--out")
    return p


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _verify(args) -> int:
    manifests = []
    try:
        if args.manifest:
            manifests.append(load_manifest(args.manifest))
        for name in args.fixture:
            manifests.append(get_fixture(name))
        if args.all_fixtures:
            manifests.extend(get_fixture(n) for n in default_suite())
    except ManifestError as exc:
        print(f"error: {args.manifest}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    if not manifests:
        print("error: give a manifest path, --fixture or --all-fixtures", file=sys.stderr)
        return EXIT_USAGE
    if args.workers < 1:
        print("error: --workers must be positive", file=sys.stderr)
        return EXIT_USAGE
    reports = [run(m.with_overrides(seed=args.seed, checks=args.checks), workers=args.workers) for m in manifests]
    if args.format == "machine" and len(reports) > 1:
        objs = [r.to_obj(args.timings) for r in reports]
        text = json.dumps(objs, sort_keys=True, indent=1, allow_nan=False) + "\n"
    else:
        text = "".join(emit(r, args.format, args.timings) for r in reports)
    _write(text, args.out)
    return EXIT_FAIL if any(r.exit_code for r in reports) else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command == "verify":
        return _verify(args)
    if args.command == "list-fixtures":
        for name in REGISTRY:
            print(name)
        return EXIT_OK
    try:
        m = get_fixture(args.name)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    _write(m.dumps(), args.out)
    return EXIT_OK
