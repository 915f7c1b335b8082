"""Declared-but-unreferenced resources and references to resources that do not exist."""

from __future__ import annotations

from typing import Iterator

from ..model import Diagnostic, Severity
from ..taxonomy import Category, DefectCategory, FixPattern
from .graph import ReferenceGraph

CATEGORY = DefectCategory(Category.ORPHANISM)

UNREFERENCED = "declared-unreferenced"
NONEXISTENT = "referenced-nonexistent"


def unreferenced_declarations(graph: ReferenceGraph):
    for decl in graph.all_declarations():
        if not graph.inbound(decl):
            yield decl


def dangling_references(graph: ReferenceGraph):
    for ref in graph.references:
        if not graph.exists(ref.target):
            yield ref


def check_orphanism(ctx) -> Iterator[Diagnostic]:
    graph = ctx.corpus.graph
    for decl in unreferenced_declarations(graph):
        kind, name = decl.key.kind, decl.key.name
        yield Diagnostic(
            rule_id="ORPHANISM",
            category=CATEGORY,
            location=decl.span,
            key_path=decl.key_path,
            message=f"{kind} '{name}' is declared but nothing references it",
            severity=Severity.INFO,
        )
    for ref in dangling_references(graph):
        kind, name = ref.target.kind, ref.target.name
        where = f" in namespace '{ref.target.namespace}'" if ref.target.namespace else ""
        yield Diagnostic(
            rule_id="ORPHANISM",
            category=CATEGORY,
            location=ref.span,
            key_path=ref.key_path,
            message=f"references {kind} '{name}'{where}, which is not declared",
            fix_pattern=FixPattern.OM,
            fix_hint=f"declare {kind}/{name} or remove the reference",
            severity=Severity.ERROR,
        )
