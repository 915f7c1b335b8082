"""Command-line entry point: ``kcfglint scan``, ``kcfglint eval`` and helpers."""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .corpus import DEFAULT_IGNORES, build_corpus
from .evaluation import MalformedAlerts, MalformedRow, format_table, load_alerts, load_category_map, load_dataset, score
from .model import Severity
from .parser import write_flat
from .report import FORMATS, Report, emit, exit_code
from .rules import ConfigError, RuleConfig, default_registry, load_rule_config, run_rules

log = logging.getLogger("kcfglint")

EXIT_OK, EXIT_FOUND, EXIT_ERROR = 0, 1, 2


def _write(data: bytes, output: Optional[str]) -> None:
    if output and output != "-":
        Path(output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _timestamp(value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    if value == "now":
        return dt.datetime.now(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return value


def cmd_scan(args: argparse.Namespace) -> int:
    root = Path(args.root)
    if not root.is_dir():
        print(f"kcfglint: {root}: not a directory", file=sys.stderr)
        return EXIT_ERROR
    registry = default_registry()
    try:
        config = load_rule_config(args.rules, registry.ids()) if args.rules else RuleConfig()
    except ConfigError as exc:
        print(f"kcfglint: {exc}", file=sys.stderr)
        return EXIT_ERROR
    ignore = tuple(DEFAULT_IGNORES) + tuple(args.ignore or ())
    try:
        corpus = build_corpus(root, ignore=ignore, workers=args.workers)
        failures: list = []
        diags = run_rules(corpus, registry, config, workers=args.workers, errors=failures)
        if args.export_flat:
            write_flat(corpus.documents, args.export_flat)
        report = Report.build(
            diags,
            scan_root=args.root,
            rules={r.id: r.description for r in registry.enabled(config)},
            tool_errors=[f"{f.rule_id}: {f.file or '<corpus>'}: {f.error}" for f in failures],
        )
        _write(emit(report, args.format, _timestamp(args.timestamp)), args.output)
        if args.plot:
            from .plotting import plot_category_counts

            plot_category_counts(report.counts, args.plot)
    except OSError as exc:
        print(f"kcfglint: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if failures:
        for f in failures:
            print(f"kcfglint: rule {f.rule_id} failed on {f.file or '<corpus>'}: {f.error}", file=sys.stderr)
    return exit_code(diags, Severity(args.fail_on), tool_error=bool(failures))


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        cmap = load_category_map(args.category_map) if args.category_map else None
        loaded = load_alerts(args.alerts, cmap, args.root)
        defects = load_dataset(args.dataset)
    except (OSError, MalformedRow, MalformedAlerts, ValueError, KeyError) as exc:
        print(f"kcfglint: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = score(loaded.alerts, defects, method=args.method, unmapped=loaded.unmapped)
    if args.format == "json":
        out = json.dumps(report.to_dict(), indent=2) + "\n"
    else:
        out = format_table(report)
        if loaded.unmapped:
            out += f"# {loaded.unmapped} alert(s) had no category and were not scored\n"
    _write(out.encode("utf-8"), args.output)
    if args.plot:
        from .plotting import plot_precision_recall

        plot_precision_recall(report, args.plot)
    return EXIT_OK


def cmd_rules(args: argparse.Namespace) -> int:
    lines = [f"{r.id}\t{r.category}\t{'on' if r.enabled_by_default else 'off'}\t{r.description}" for r in default_registry()]
    _write(("\n".join(lines) + "\n").encode("utf-8"), None)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    from .synth import generate_corpus, write_dataset

    out = Path(args.out)
    if out.exists() and any(out.iterdir()):
        print(f"kcfglint: {out} is not empty", file=sys.stderr)
        return EXIT_ERROR
    corpus = generate_corpus(out / "corpus", seed=args.seed, scale=args.scale)
    write_dataset(corpus.defects, out / "dataset.csv")
    print(f"wrote {corpus.files} scripts and {len(corpus.defects)} labeled defects to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kcfglint", description="Find configuration defects in Kubernetes manifests and Helm charts.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="lint every YAML file under a directory")
    scan.add_argument("root", help="directory to scan")
    scan.add_argument("--format", choices=FORMATS, default="text")
    scan.add_argument("--rules", metavar="FILE", help="rule configuration (YAML)")
    scan.add_argument("--ignore", metavar="GLOB", action="append", help="skip matching paths (repeatable)")
    scan.add_argument("--export-flat", metavar="PATH", help="write flattened documents as JSON lines")
    scan.add_argument("--fail-on", choices=[s.value for s in Severity], default="error", help="lowest severity that makes the exit status 1")
    scan.add_argument("--workers", type=int, default=1, help="parallel parse/rule workers")
    scan.add_argument("-o", "--output", metavar="PATH", help="write the report here instead of stdout")
    scan.add_argument("--timestamp", metavar="ISO8601|now", help="record a run time in SARIF output")
    scan.add_argument("--plot", metavar="PNG", help="also save a bar chart of counts per category")
    scan.set_defaults(func=cmd_scan)

    ev = sub.add_parser("eval", help="score alerts against a labeled defect dataset")
    ev.add_argument("--alerts", required=True, help="JSON report from scan, or any SARIF 2.1.0 log")
    ev.add_argument("--dataset", required=True, help="labeled defects (CSV or JSON)")
    ev.add_argument("--root", help="scan root, stripped from absolute alert paths")
    ev.add_argument("--category-map", metavar="FILE", help="rule id to category mapping for third-party alerts")
    ev.add_argument("--method", choices=("maximum", "greedy"), default="maximum")
    ev.add_argument("--format", choices=("table", "json"), default="table")
    ev.add_argument("-o", "--output", metavar="PATH")
    ev.add_argument("--plot", metavar="PNG", help="also save a precision/recall bar chart")
    ev.set_defaults(func=cmd_eval)

    rules = sub.add_parser("rules", help="list available rules")
    rules.set_defaults(func=cmd_rules)

    syn = sub.add_parser("synth", help="write a synthetic labeled corpus")
    syn.add_argument("out", help="empty or new directory")
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--scale", type=int, default=1, help="number of 200-script parts")
    syn.set_defaults(func=cmd_synth)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be at least 1")
    try:
        return args.func(args)
    except Exception as exc:  # last-resort: report and exit 2 rather than a traceback
        log.debug("unhandled error", exc_info=True)
        print(f"kcfglint: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
