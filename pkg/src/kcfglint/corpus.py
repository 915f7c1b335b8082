"""File discovery, chart detection and corpus assembly."""

from __future__ import annotations

import fnmatch
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .model import ConfigDocument, ScriptKind
from .parser import YAML_SUFFIXES, FileResult, HelmChart, ParseFailure, parse_file
from .rules.graph import ReferenceGraph, build_reference_graph

DEFAULT_IGNORES = (".*", "node_modules", "vendor")


@dataclass
class Corpus:
    documents: list[ConfigDocument]
    charts: list[HelmChart] = field(default_factory=list)
    graph: ReferenceGraph = field(default_factory=ReferenceGraph)
    scan_root: str = "."
    failures: list[ParseFailure] = field(default_factory=list)

    @classmethod
    def from_documents(
        cls,
        documents: Sequence[ConfigDocument],
        charts: Sequence[HelmChart] = (),
        failures: Sequence[ParseFailure] = (),
        scan_root: str = ".",
    ) -> "Corpus":
        docs = list(documents)
        return cls(docs, list(charts), build_reference_graph(docs), scan_root, list(failures))

    def chart_for(self, doc: ConfigDocument) -> Optional[HelmChart]:
        for chart in self.charts:
            if chart.is_template_file(doc.file):
                return chart
        return None


def _ignored(rel: str, name: str, patterns: Sequence[str]) -> bool:
    return any(fnmatch.fnmatch(name, p) or fnmatch.fnmatch(rel, p) for p in patterns)


def discover(root: Path, ignore: Sequence[str] = DEFAULT_IGNORES) -> list[Path]:
    """All YAML files under ``root`` in a stable order, minus ignored paths."""
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        base = Path(dirpath)
        kept = []
        for d in dirnames:
            rel = (base / d).relative_to(root).as_posix()
            if not _ignored(rel, d, ignore):
                kept.append(d)
        dirnames[:] = sorted(kept)
        for f in filenames:
            if not f.endswith(YAML_SUFFIXES):
                continue
            rel = (base / f).relative_to(root).as_posix()
            if not _ignored(rel, f, ignore):
                found.append(base / f)
    return sorted(found, key=lambda p: p.relative_to(root).as_posix())


def is_chart_root(path: Path) -> bool:
    if (path / "Chart.yaml").is_file() or (path / "Chart.yml").is_file():
        return True
    has_values = (path / "values.yaml").is_file() or (path / "values.yml").is_file()
    return has_values and (path / "templates").is_dir()


def find_chart_roots(root: Path, files: Iterable[Path]) -> list[Path]:
    candidates: set[Path] = set()
    for f in files:
        for parent in f.parents:
            if parent in candidates:
                break
            if is_chart_root(parent):
                candidates.add(parent)
            if parent == root:
                break
    return sorted(candidates, key=lambda p: p.as_posix())


def classify(path: Path, chart_roots: Sequence[Path]) -> tuple[ScriptKind, Optional[Path]]:
    """Script kind of ``path`` and the chart root it belongs to (nearest ancestor)."""
    for parent in path.parents:
        if parent in chart_roots:
            if path.parent == parent and path.name in ("values.yaml", "values.yml"):
                return ScriptKind.HELM_VALUES, parent
            if (parent / "templates") in path.parents:
                return ScriptKind.HELM_TEMPLATE, parent
            return ScriptKind.KIND, None
    return ScriptKind.KIND, None


def _parse_job(job: tuple[str, str, ScriptKind]) -> FileResult:
    return parse_file(*job)


def build_corpus(root, ignore: Sequence[str] = DEFAULT_IGNORES, workers: int = 1) -> Corpus:
    """Parse every YAML file under ``root`` into a corpus with its reference graph."""
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(str(root))
    files = discover(root, ignore)
    chart_roots = find_chart_roots(root, files)
    jobs = []
    owners: list[Optional[Path]] = []
    for f in files:
        kind, owner = classify(f, chart_roots)
        jobs.append((str(f), f.relative_to(root).as_posix(), kind))
        owners.append(owner)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_parse_job, jobs, chunksize=max(1, len(jobs) // (workers * 4))))
    else:
        results = [_parse_job(j) for j in jobs]

    documents: list[ConfigDocument] = []
    failures: list[ParseFailure] = []
    per_chart: dict[Path, dict] = {c: {"values": None, "templates": [], "failures": []} for c in chart_roots}
    for (path, _, kind), owner, res in zip(jobs, owners, results):
        documents.extend(res.documents)
        if res.failure:
            failures.append(res.failure)
        if owner is None:
            continue
        slot = per_chart[owner]
        if kind is ScriptKind.HELM_VALUES:
            if slot["values"] is None and res.documents:
                slot["values"] = res.documents[0]
        else:
            slot["templates"].extend(res.documents)
        if res.failure:
            slot["failures"].append(res.failure)
    charts = []
    for c in chart_roots:
        slot = per_chart[c]
        rel = c.relative_to(root).as_posix()
        charts.append(HelmChart(rel, slot["values"], tuple(slot["templates"]), tuple(slot["failures"])))
    return Corpus(documents, charts, build_reference_graph(documents), root.as_posix(), failures)
