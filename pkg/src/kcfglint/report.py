"""Rendering diagnostics as text, JSON and SARIF 2.1.0."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from . import __version__
from .model import Diagnostic, KeyPath, Severity, SourceSpan, sort_diagnostics
from .taxonomy import Category, Consequence, DefectCategory, FixPattern

TOOL_NAME = "kcfglint"
FORMATS = ("text", "json", "sarif")
SARIF_VERSION = "2.1.0"
SARIF_SCHEMA = "https://json.schemastore.org/sarif-2.1.0.json"
_SARIF_LEVEL = {Severity.ERROR: "error", Severity.WARNING: "warning", Severity.INFO: "note"}


class UnsupportedFormat(ValueError):
    pass


@dataclass(frozen=True)
class Report:
    diagnostics: tuple[Diagnostic, ...]
    tool_name: str = TOOL_NAME
    tool_version: str = __version__
    scan_root: str = "."
    counts: Mapping[str, int] = field(default_factory=dict)
    # rule id -> one-line description, for the SARIF rule table
    rules: Mapping[str, str] = field(default_factory=dict)
    tool_errors: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        expected = count_by_category(self.diagnostics)
        if dict(self.counts) != expected:
            raise ValueError("counts do not match diagnostics")
        if list(self.diagnostics) != sort_diagnostics(self.diagnostics):
            raise ValueError("diagnostics must be sorted")

    @classmethod
    def build(
        cls,
        diagnostics: Iterable[Diagnostic],
        scan_root: str = ".",
        rules: Optional[Mapping[str, str]] = None,
        tool_errors: Sequence[str] = (),
    ) -> "Report":
        diags = tuple(sort_diagnostics(list(diagnostics)))
        return cls(
            diags,
            scan_root=scan_root,
            counts=count_by_category(diags),
            rules=dict(sorted((rules or {}).items())),
            tool_errors=tuple(tool_errors),
        )

    def to_dict(self) -> dict:
        return {
            "tool": {"name": self.tool_name, "version": self.tool_version},
            "scan_root": self.scan_root,
            "summary": {"total": len(self.diagnostics), "by_category": dict(self.counts)},
            "rules": dict(self.rules),
            "diagnostics": [_diag_to_dict(d) for d in self.diagnostics],
            "tool_errors": list(self.tool_errors),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Report":
        diags = tuple(diagnostic_from_dict(d) for d in data.get("diagnostics", []))
        return cls(
            diags,
            tool_name=data["tool"]["name"],
            tool_version=data["tool"]["version"],
            scan_root=data.get("scan_root", "."),
            counts=dict(data.get("summary", {}).get("by_category", {})),
            rules=dict(data.get("rules", {})),
            tool_errors=tuple(data.get("tool_errors", [])),
        )


def count_by_category(diags: Iterable[Diagnostic]) -> dict[str, int]:
    counts = Counter(str(d.category) for d in diags)
    return dict(sorted(counts.items()))


def _diag_to_dict(d: Diagnostic) -> dict:
    loc = d.location
    return {
        "rule_id": d.rule_id,
        "category": str(d.category),
        "severity": d.severity.value,
        "file": loc.file,
        "start_line": loc.start_line,
        "start_col": loc.start_col,
        "end_line": loc.end_line,
        "end_col": loc.end_col,
        "key_path": str(d.key_path),
        "message": d.message,
        "consequence": d.consequence.value,
        "fix_pattern": d.fix_pattern.value,
        "fix_hint": d.fix_hint,
    }


def diagnostic_from_dict(data: Mapping) -> Diagnostic:
    span = SourceSpan(
        data["file"],
        int(data["start_line"]),
        int(data.get("start_col", 1)),
        int(data.get("end_line", data["start_line"])),
        int(data.get("end_col", data.get("start_col", 1))),
    )
    return Diagnostic(
        rule_id=data["rule_id"],
        category=DefectCategory.parse(data["category"]),
        location=span,
        key_path=KeyPath.parse(data.get("key_path") or ""),
        message=data["message"],
        consequence=Consequence(data["consequence"]) if data.get("consequence") else None,
        fix_pattern=FixPattern(data["fix_pattern"]) if data.get("fix_pattern") else None,
        fix_hint=data.get("fix_hint"),
        severity=Severity(data.get("severity", "warning")),
    )


def suggest_fix(diag: Diagnostic) -> str:
    """Concrete repair hint when the rule produced one, else the fix pattern's definition."""
    if diag.fix_hint:
        return diag.fix_hint
    return diag.fix_pattern.definition


def format_line(diag: Diagnostic) -> str:
    loc = diag.location
    return (
        f"{loc.file}:{loc.start_line}:{loc.start_col} [{diag.rule_id}/{diag.category}] {diag.message} "
        f"({diag.consequence.value}; fix: {diag.fix_pattern.value}: {suggest_fix(diag)})"
    )


def _summary(report: Report) -> str:
    n = len(report.diagnostics)
    text = f"{n} defect" if n == 1 else f"{n} defects"
    if report.counts:
        text += " (" + ", ".join(f"{cat}: {c}" for cat, c in report.counts.items()) + ")"
    return text


def emit_text(report: Report) -> str:
    lines = [format_line(d) for d in report.diagnostics]
    lines.extend(f"tool error: {e}" for e in report.tool_errors)
    lines.append(_summary(report))
    return "\n".join(lines) + "\n"


def emit_json(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"


def _rule_descriptors(report: Report) -> list[dict]:
    ids = sorted(set(report.rules) | {d.rule_id for d in report.diagnostics})
    by_rule: dict[str, Diagnostic] = {}
    for d in report.diagnostics:
        by_rule.setdefault(d.rule_id, d)
    out = []
    for rule_id in ids:
        desc: dict = {"id": rule_id, "name": rule_id.title().replace("_", "")}
        text = report.rules.get(rule_id)
        if text:
            desc["shortDescription"] = {"text": text}
        sample = by_rule.get(rule_id)
        if sample is not None:
            desc["properties"] = {"category": str(sample.category.top)}
        out.append(desc)
    return out


def _sarif_result(d: Diagnostic, rule_index: int) -> dict:
    loc = d.location
    result = {
        "ruleId": d.rule_id,
        "ruleIndex": rule_index,
        "level": _SARIF_LEVEL[d.severity],
        "message": {"text": d.message},
        "locations": [
            {
                "physicalLocation": {
                    "artifactLocation": {"uri": loc.file},
                    "region": {
                        "startLine": loc.start_line,
                        "startColumn": loc.start_col,
                        "endLine": loc.end_line,
                        "endColumn": loc.end_col,
                    },
                },
                "logicalLocations": [{"fullyQualifiedName": str(d.key_path), "kind": "member"}],
            }
        ],
        "properties": {
            "category": str(d.category),
            "consequence": d.consequence.value,
            "fixPattern": d.fix_pattern.value,
            "fixHint": suggest_fix(d),
            "keyPath": str(d.key_path),
        },
    }
    return result


def emit_sarif(report: Report, timestamp: Optional[str] = None) -> str:
    rules = _rule_descriptors(report)
    index = {r["id"]: i for i, r in enumerate(rules)}
    run: dict = {
        "tool": {
            "driver": {
                "name": report.tool_name,
                "version": report.tool_version,
                "rules": rules,
            }
        },
        "results": [_sarif_result(d, index[d.rule_id]) for d in report.diagnostics],
    }
    if timestamp is not None or report.tool_errors:
        invocation: dict = {"executionSuccessful": not report.tool_errors}
        if timestamp is not None:
            invocation["endTimeUtc"] = timestamp
        if report.tool_errors:
            invocation["toolExecutionNotifications"] = [
                {"level": "error", "message": {"text": e}} for e in report.tool_errors
            ]
        run["invocations"] = [invocation]
    doc = {"$schema": SARIF_SCHEMA, "version": SARIF_VERSION, "runs": [run]}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def emit(report: Report, fmt: str, timestamp: Optional[str] = None) -> bytes:
    if fmt == "text":
        out = emit_text(report)
    elif fmt == "json":
        out = emit_json(report)
    elif fmt == "sarif":
        out = emit_sarif(report, timestamp)
    else:
        raise UnsupportedFormat(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    return out.encode("utf-8")


def exit_code(diagnostics: Iterable[Diagnostic], fail_on: Severity = Severity.ERROR, tool_error: bool = False) -> int:
    """0 when nothing reaches ``fail_on``, 1 when something does, 2 on tool failure."""
    if tool_error:
        return 2
    threshold = fail_on.rank
    return 1 if any(d.severity.rank >= threshold for d in diagnostics) else 0


def category_counts_by_top(diags: Iterable[Diagnostic]) -> dict[Category, int]:
    counts = Counter(d.category.category for d in diags)
    return {c: counts[c] for c in Category if counts[c]}
