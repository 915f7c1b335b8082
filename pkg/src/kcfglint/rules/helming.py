"""Hard-coded configuration values inside Helm templates."""

from __future__ import annotations

import re
from typing import Iterator, Optional

from ..model import ConfigDocument, Diagnostic, KeyPath, ScalarTag, ScalarValue, ScriptKind, Severity
from ..parser import DirectiveToken, HelmChart
from ..taxonomy import Category, DefectCategory
from .graph import plain_text

CATEGORY = DefectCategory(Category.INCORRECT_HELMING)


def is_template(doc: ConfigDocument, corpus=None) -> bool:
    """A document is a template if it sits in a chart's ``templates/`` or uses directives."""
    if doc.script_kind is ScriptKind.HELM_TEMPLATE or doc.directive_table:
        return True
    if corpus is not None:
        return corpus.chart_for(doc) is not None
    return False


def is_hard_coded(value: ScalarValue) -> bool:
    return not value.directive_ids and value.tag is not ScalarTag.NULL


_VALUES_REF = re.compile(r"^\$?\.Values((?:\.[A-Za-z_][\w-]*)+)$")


def values_path(token: DirectiveToken | str) -> Optional[KeyPath]:
    """``.Values`` path addressed by a directive, or None for anything more complex."""
    text = token.original_text if isinstance(token, DirectiveToken) else token
    body = text.strip()
    if not (body.startswith("{{") and body.endswith("}}")):
        return None
    body = body[2:-2]
    if body.startswith("-"):
        body = body[1:]
    if body.endswith("-"):
        body = body[:-1]
    head = body.split("|", 1)[0].strip()
    m = _VALUES_REF.match(head)
    if not m:
        return None
    return KeyPath(tuple(m.group(1)[1:].split(".")))


def resolve_directive(token: DirectiveToken, chart: HelmChart) -> Optional[ScalarValue]:
    """Default from ``values.yaml`` for a directive such as ``{{ .Values.a.b | quote }}``."""
    path = values_path(token)
    if path is None or chart.values_doc is None:
        return None
    leaf = chart.values_doc.get(path)
    return None if leaf is None else leaf.value


def _camel(text: str) -> str:
    parts = [p for p in re.split(r"[^0-9A-Za-z]+", text) if p]
    if not parts:
        return ""
    head = parts[0][0].lower() + parts[0][1:]
    return head + "".join(p[0].upper() + p[1:] for p in parts[1:])


_STRUCTURAL = frozenset({"spec", "template", "jobTemplate", "containers", "initContainers", "volumeMounts", "volumes"})


def suggested_values_key(doc: ConfigDocument, path: KeyPath) -> str:
    """Chart-local ``.Values`` key for a hard-coded leaf, e.g. ``main.image``."""
    segs: list[str] = []
    prefix = KeyPath()
    for seg in path.segments[:-1]:
        prefix = prefix / seg
        if isinstance(seg, int):
            name = plain_text(doc.get(prefix / "name"))
            if name and _camel(name):
                segs.append(_camel(name))
        elif seg not in _STRUCTURAL and seg != "metadata":
            segs.append(_camel(seg) or seg)
    terminal = path.terminal_key or "value"
    segs.append(_camel(terminal) or terminal)
    return ".".join(segs)


def check_incorrect_helming(doc: ConfigDocument, ctx) -> Iterator[Diagnostic]:
    if not is_template(doc, ctx.corpus):
        return
    keys = ctx.config.helming_keys
    for leaf in doc.leaves:
        key = leaf.path.terminal_key
        if key not in keys or not is_hard_coded(leaf.value):
            continue
        values_key = suggested_values_key(doc, leaf.path)
        yield Diagnostic(
            rule_id="INCORRECT_HELMING",
            category=CATEGORY,
            location=leaf.span,
            key_path=leaf.path,
            message=f"'{key}' is hard-coded in a template ({leaf.value.raw_text!r}); values supplied by users are ignored",
            fix_hint=f"{key}: {{{{ .Values.{values_key} }}}}",
            severity=Severity.WARNING,
        )
