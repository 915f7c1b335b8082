"""Scoring an alert stream against labeled defects: per-category precision and recall."""

from __future__ import annotations

import csv
import json
import posixpath
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence
from urllib.parse import unquote, urlparse

import networkx as nx

from .model import Diagnostic, KeyPath
from .taxonomy import Category, DefectCategory

LINE_TOLERANCE = 2
DATASET_COLUMNS = ("id", "file", "key_path", "line", "category", "sub_category", "pattern_note")


class MalformedRow(ValueError):
    def __init__(self, row: int, reason: str):
        super().__init__(f"row {row}: {reason}")
        self.row = row
        self.reason = reason


class MalformedAlerts(ValueError):
    pass


def normalize_path(path: str, scan_root: Optional[str] = None) -> str:
    """Comparable POSIX form of a file reference, relative to ``scan_root`` when possible."""
    if "://" in path:
        parsed = urlparse(path)
        path = unquote(parsed.path)
    path = path.replace("\\", "/")
    if scan_root:
        root = posixpath.normpath(scan_root.replace("\\", "/"))
        norm = posixpath.normpath(path)
        if norm == root:
            return "."
        if norm.startswith(root.rstrip("/") + "/"):
            path = norm[len(root.rstrip("/")) + 1 :]
    path = posixpath.normpath(path)
    while path.startswith("./"):
        path = path[2:]
    return path


@dataclass(frozen=True)
class LabeledDefect:
    id: str
    file: str
    category: DefectCategory
    key_path: Optional[KeyPath] = None
    line: Optional[int] = None
    pattern_note: Optional[str] = None

    def __post_init__(self) -> None:
        if self.key_path is None and self.line is None:
            raise ValueError(f"defect {self.id}: needs a key_path or a line")


@dataclass(frozen=True)
class Alert:
    """The fields of an alert that scoring looks at."""

    rule_id: str
    category: DefectCategory
    file: str
    start_line: int
    key_path: Optional[KeyPath] = None

    @classmethod
    def from_diagnostic(cls, diag: Diagnostic) -> "Alert":
        return cls(diag.rule_id, diag.category, diag.file, diag.start_line, diag.key_path)


def _opt(value) -> Optional[str]:
    if value is None:
        return None
    text = str(value).strip()
    return text or None


def _defect_from_row(row: Mapping, n: int) -> LabeledDefect:
    ident = _opt(row.get("id")) or str(n)
    file = _opt(row.get("file"))
    if file is None:
        raise MalformedRow(n, "missing file")
    cat_text = _opt(row.get("category"))
    if cat_text is None:
        raise MalformedRow(n, "missing category")
    try:
        category = DefectCategory.parse(cat_text, _opt(row.get("sub_category")))
    except ValueError as exc:
        raise MalformedRow(n, str(exc)) from exc
    key_path = None
    kp_text = _opt(row.get("key_path"))
    if kp_text is not None:
        try:
            key_path = KeyPath.parse(kp_text)
        except ValueError as exc:
            raise MalformedRow(n, f"bad key_path {kp_text!r}") from exc
    line = None
    line_text = _opt(row.get("line"))
    if line_text is not None:
        try:
            line = int(line_text)
        except ValueError as exc:
            raise MalformedRow(n, f"bad line {line_text!r}") from exc
        if line < 1:
            raise MalformedRow(n, f"line must be positive, got {line}")
    if key_path is None and line is None:
        raise MalformedRow(n, "needs a key_path or a line")
    return LabeledDefect(ident, normalize_path(file), category, key_path, line, _opt(row.get("pattern_note")))


def load_dataset(path) -> list[LabeledDefect]:
    """Read labeled defects from CSV (header row) or JSON (list of objects).

    Rows are numbered from 1, counting data rows only.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text) if text.strip() else []
        except json.JSONDecodeError as exc:
            raise MalformedRow(0, f"invalid JSON: {exc}") from exc
        if isinstance(data, dict):
            data = data.get("defects", [])
        if not isinstance(data, list):
            raise MalformedRow(0, "expected a list of defects")
        rows = data
    else:
        rows = list(csv.DictReader(text.splitlines()))
    out = []
    for n, row in enumerate(rows, start=1):
        if not isinstance(row, Mapping):
            raise MalformedRow(n, "expected an object")
        out.append(_defect_from_row(row, n))
    seen: set[str] = set()
    for n, d in enumerate(out, start=1):
        if d.id in seen:
            raise MalformedRow(n, f"duplicate id {d.id!r}")
        seen.add(d.id)
    return out


@dataclass
class LoadedAlerts:
    alerts: list[Alert]
    # alerts whose rule has no known category; left out of scoring
    unmapped: int = 0


def _category_of(text: Optional[str], rule_id: str, category_map: Mapping[str, str]) -> Optional[DefectCategory]:
    for candidate in (category_map.get(rule_id), text):
        if candidate:
            try:
                return DefectCategory.parse(candidate)
            except ValueError:
                continue
    return None


def _sarif_alerts(doc: Mapping, category_map: Mapping[str, str], scan_root: Optional[str]) -> LoadedAlerts:
    out = LoadedAlerts([])
    for run in doc.get("runs", []):
        rules = run.get("tool", {}).get("driver", {}).get("rules", [])
        for result in run.get("results", []):
            rule_id = result.get("ruleId")
            if rule_id is None and "ruleIndex" in result and result["ruleIndex"] < len(rules):
                rule_id = rules[result["ruleIndex"]].get("id")
            rule_id = rule_id or "?"
            props = result.get("properties", {})
            category = _category_of(props.get("category"), rule_id, category_map)
            locs = result.get("locations") or []
            phys = locs[0].get("physicalLocation", {}) if locs else {}
            uri = phys.get("artifactLocation", {}).get("uri")
            if category is None or uri is None:
                out.unmapped += 1
                continue
            line = phys.get("region", {}).get("startLine", 1)
            kp_text = props.get("keyPath")
            if kp_text is None and locs and locs[0].get("logicalLocations"):
                kp_text = locs[0]["logicalLocations"][0].get("fullyQualifiedName")
            key_path = KeyPath.parse(kp_text) if kp_text is not None else None
            out.alerts.append(Alert(rule_id, category, normalize_path(uri, scan_root), int(line), key_path))
    return out


def _json_alerts(doc, category_map: Mapping[str, str], scan_root: Optional[str]) -> LoadedAlerts:
    items = doc.get("diagnostics", []) if isinstance(doc, dict) else doc
    out = LoadedAlerts([])
    for item in items:
        rule_id = item.get("rule_id", "?")
        category = _category_of(item.get("category"), rule_id, category_map)
        if category is None:
            out.unmapped += 1
            continue
        kp = item.get("key_path")
        out.alerts.append(
            Alert(
                rule_id,
                category,
                normalize_path(item["file"], scan_root),
                int(item.get("start_line") or item.get("line") or 1),
                KeyPath.parse(kp) if kp is not None else None,
            )
        )
    return out


def load_alerts(path, category_map: Optional[Mapping[str, str]] = None, scan_root: Optional[str] = None) -> LoadedAlerts:
    """Read alerts from this tool's JSON report or from any SARIF 2.1.0 log.

    ``category_map`` maps rule ids to category names for tools that do not
    record a category on each result.
    """
    category_map = category_map or {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedAlerts(f"{path}: invalid JSON: {exc}") from exc
    try:
        if isinstance(doc, dict) and "runs" in doc:
            return _sarif_alerts(doc, category_map, scan_root)
        return _json_alerts(doc, category_map, scan_root)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise MalformedAlerts(f"{path}: {type(exc).__name__}: {exc}") from exc


def load_category_map(path) -> dict[str, str]:
    """Rule id -> category, from a JSON object or a two-column CSV (rule_id, category)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        return {str(k): str(v) for k, v in data.items()}
    return {row["rule_id"]: row["category"] for row in csv.DictReader(text.splitlines())}


def _as_alert(a) -> Alert:
    return a if isinstance(a, Alert) else Alert.from_diagnostic(a)


def match_alert(alert, defect: LabeledDefect) -> bool:
    """Same category, same file, same location."""
    alert = _as_alert(alert)
    if alert.category.category is not defect.category.category:
        return False
    if defect.category.sub_category is not None and alert.category.sub_category is not defect.category.sub_category:
        return False
    if normalize_path(alert.file) != normalize_path(defect.file):
        return False
    if defect.key_path is not None:
        return alert.key_path == defect.key_path
    return abs(alert.start_line - defect.line) <= LINE_TOLERANCE


@dataclass(frozen=True)
class CategoryScore:
    defects: int
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> Optional[float]:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else None

    @property
    def recall(self) -> Optional[float]:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else None


@dataclass
class EvalReport:
    per_category: dict[Category, CategoryScore]
    pairs: list[tuple[Alert, LabeledDefect]] = field(default_factory=list)
    unmapped_alerts: int = 0

    @property
    def overall(self) -> CategoryScore:
        scores = self.per_category.values()
        return CategoryScore(
            sum(s.defects for s in scores),
            sum(s.tp for s in scores),
            sum(s.fp for s in scores),
            sum(s.fn for s in scores),
        )

    def to_dict(self) -> dict:
        def row(s: CategoryScore) -> dict:
            return {"defects": s.defects, "tp": s.tp, "fp": s.fp, "fn": s.fn, "precision": s.precision, "recall": s.recall}

        return {
            "per_category": {c.value: row(s) for c, s in self.per_category.items()},
            "overall": row(self.overall),
            "unmapped_alerts": self.unmapped_alerts,
        }


def _alert_order(a: Alert) -> tuple:
    return (a.file, a.start_line, a.rule_id, str(a.key_path or ""), str(a.category))


def _defect_order(d: LabeledDefect) -> tuple:
    return (d.file, d.line or 0, str(d.key_path or ""), str(d.category), d.id)


def maximum_matching(alerts: Sequence[Alert], defects: Sequence[LabeledDefect]) -> list[tuple[int, int]]:
    """Largest one-to-one set of (alert index, defect index) pairs that match."""
    graph = nx.Graph()
    left = [("a", i) for i in range(len(alerts))]
    graph.add_nodes_from(left)
    graph.add_nodes_from(("d", j) for j in range(len(defects)))
    for i, a in enumerate(alerts):
        for j, d in enumerate(defects):
            if match_alert(a, d):
                graph.add_edge(("a", i), ("d", j))
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=left)
    return sorted((i, matching[("a", i)][1]) for _, i in left if ("a", i) in matching)


def greedy_matching(alerts: Sequence[Alert], defects: Sequence[LabeledDefect]) -> list[tuple[int, int]]:
    """Each alert in order claims the first unclaimed defect it matches."""
    taken: set[int] = set()
    out = []
    for i, a in enumerate(alerts):
        for j, d in enumerate(defects):
            if j not in taken and match_alert(a, d):
                taken.add(j)
                out.append((i, j))
                break
    return out


def score(alerts: Iterable, defects: Iterable[LabeledDefect], method: str = "maximum", unmapped: int = 0) -> EvalReport:
    """Match alerts to defects one-to-one and count TP/FP/FN per top-level category.

    ``method`` is ``"maximum"`` (largest possible matching) or ``"greedy"``
    (alerts in file/line order, first match wins). Inputs are put in a
    canonical order first, so the result does not depend on input order.
    """
    alert_list = sorted((_as_alert(a) for a in alerts), key=_alert_order)
    defect_list = sorted(defects, key=_defect_order)
    if method == "maximum":
        pairs = maximum_matching(alert_list, defect_list)
    elif method == "greedy":
        pairs = greedy_matching(alert_list, defect_list)
    else:
        raise ValueError(f"unknown matching method {method!r}")
    matched_a = {i for i, _ in pairs}
    matched_d = {j for _, j in pairs}
    counts: dict[Category, list[int]] = {}

    def slot(cat: Category) -> list[int]:
        return counts.setdefault(cat, [0, 0, 0, 0])

    for d in defect_list:
        slot(d.category.category)[0] += 1
    for i, j in pairs:
        slot(defect_list[j].category.category)[1] += 1
    for i, a in enumerate(alert_list):
        if i not in matched_a:
            slot(a.category.category)[2] += 1
    for j, d in enumerate(defect_list):
        if j not in matched_d:
            slot(d.category.category)[3] += 1
    per_category = {c: CategoryScore(*counts[c]) for c in Category if c in counts}
    return EvalReport(per_category, [(alert_list[i], defect_list[j]) for i, j in pairs], unmapped)


def _ratio(x: Optional[float]) -> str:
    return "-" if x is None else f"{x:.4f}"


def format_table(report: EvalReport) -> str:
    """Tab-separated table: one row per category plus an overall row."""
    lines = ["category\tdefects\ttp\tfp\tfn\tprecision\trecall"]
    rows = list(report.per_category.items())
    for cat, s in rows:
        lines.append(f"{cat.value}\t{s.defects}\t{s.tp}\t{s.fp}\t{s.fn}\t{_ratio(s.precision)}\t{_ratio(s.recall)}")
    o = report.overall
    lines.append(f"overall\t{o.defects}\t{o.tp}\t{o.fp}\t{o.fn}\t{_ratio(o.precision)}\t{_ratio(o.recall)}")
    return "\n".join(lines) + "\n"
