"""Shared domain types: key paths, spans, scalar values, documents, diagnostics."""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence, Union

from .taxonomy import (
    Consequence,
    DefectCategory,
    FixPattern,
    default_consequence,
    default_fix_pattern,
)

Segment = Union[str, int]

PLACEHOLDER_OPEN = "⟦"
PLACEHOLDER_CLOSE = "⟧"
PLACEHOLDER_RE = re.compile(PLACEHOLDER_OPEN + r"(D\d+)" + PLACEHOLDER_CLOSE)

_BARE_KEY = re.compile(r'^[^.\[\]"]+$')


def _needs_quoting(key: str) -> bool:
    return not _BARE_KEY.match(key)


@dataclass(frozen=True)
class KeyPath:
    """Location of a value inside a document: map keys and list indices.

    Renders as ``spec.containers[0].image``. Keys that would be ambiguous in
    that form (containing ``.``, ``[``, ``]``, ``"`` or empty) are written as
    a JSON string in brackets: ``metadata.annotations["helm.sh/hook"]``.
    """

    segments: tuple[Segment, ...] = ()

    def __str__(self) -> str:
        out: list[str] = []
        for seg in self.segments:
            if isinstance(seg, int):
                out.append(f"[{seg}]")
            elif _needs_quoting(seg):
                out.append("[" + json.dumps(seg, ensure_ascii=False) + "]")
            elif out:
                out.append("." + seg)
            else:
                out.append(seg)
        return "".join(out)

    def __truediv__(self, seg: Segment) -> "KeyPath":
        return KeyPath(self.segments + (seg,))

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.segments)

    def startswith(self, prefix: "KeyPath") -> bool:
        n = len(prefix.segments)
        return self.segments[:n] == prefix.segments

    @property
    def terminal_key(self) -> Optional[str]:
        """The last map key on the path (list indices are skipped)."""
        for seg in reversed(self.segments):
            if isinstance(seg, str):
                return seg
        return None

    @property
    def parent(self) -> "KeyPath":
        return KeyPath(self.segments[:-1])

    @classmethod
    def parse(cls, text: str) -> "KeyPath":
        segs: list[Segment] = []
        i, n = 0, len(text)
        expect_key = True
        while i < n:
            ch = text[i]
            if ch == "[":
                if i + 1 < n and text[i + 1] == '"':
                    decoder = json.JSONDecoder()
                    try:
                        key, end = decoder.raw_decode(text, i + 1)
                    except json.JSONDecodeError as exc:
                        raise ValueError(f"bad quoted segment in {text!r}") from exc
                    if end >= n or text[end] != "]":
                        raise ValueError(f"unterminated segment in {text!r}")
                    segs.append(key)
                    i = end + 1
                else:
                    end = text.find("]", i)
                    if end < 0 or not text[i + 1 : end].isdigit():
                        raise ValueError(f"bad index in {text!r}")
                    segs.append(int(text[i + 1 : end]))
                    i = end + 1
                expect_key = False
            elif ch == ".":
                if expect_key:
                    raise ValueError(f"empty segment in {text!r}")
                i += 1
                expect_key = True
            else:
                if not expect_key:
                    raise ValueError(f"missing separator in {text!r}")
                m = re.compile(r'[^.\[\]"]+').match(text, i)
                if not m:
                    raise ValueError(f"unexpected character {ch!r} in {text!r}")
                segs.append(m.group())
                i = m.end()
                expect_key = False
        if segs and expect_key and text.endswith("."):
            raise ValueError(f"trailing separator in {text!r}")
        return cls(tuple(segs))


ROOT = KeyPath()


@dataclass(frozen=True, order=True)
class SourceSpan:
    """1-based region of the original file text; the end position is exclusive."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError(f"span start after end: {self}")


class ScalarTag(str, enum.Enum):
    STRING = "string"
    INT = "int"
    FLOAT = "float"
    BOOL = "bool"
    NULL = "null"
    DIRECTIVE = "directive-bearing"


@dataclass(frozen=True)
class ScalarValue:
    raw_text: str
    tag: ScalarTag
    directive_ids: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if (self.tag is ScalarTag.DIRECTIVE) != bool(self.directive_ids):
            raise ValueError("tag must be directive-bearing exactly when directives are present")

    @classmethod
    def from_text(cls, raw_text: str, tag: ScalarTag) -> "ScalarValue":
        ids = frozenset(PLACEHOLDER_RE.findall(raw_text))
        return cls(raw_text, ScalarTag.DIRECTIVE if ids else tag, ids)

    def to_python(self):
        """Interpret the scalar the way a YAML 1.1 loader would."""
        if self.tag in (ScalarTag.STRING, ScalarTag.DIRECTIVE):
            return self.raw_text
        return _construct_scalar(self.raw_text, self.tag)


def _construct_scalar(raw: str, tag: ScalarTag):
    import yaml

    tag_uri = {
        ScalarTag.INT: "tag:yaml.org,2002:int",
        ScalarTag.FLOAT: "tag:yaml.org,2002:float",
        ScalarTag.BOOL: "tag:yaml.org,2002:bool",
        ScalarTag.NULL: "tag:yaml.org,2002:null",
    }[tag]
    node = yaml.ScalarNode(tag_uri, raw)
    return yaml.SafeLoader("").construct_object(node)


class ScriptKind(str, enum.Enum):
    KIND = "KindScript"
    HELM_TEMPLATE = "HelmTemplate"
    HELM_VALUES = "HelmValues"


@dataclass(frozen=True)
class Leaf:
    path: KeyPath
    value: ScalarValue
    span: SourceSpan


@dataclass(frozen=True)
class ConfigDocument:
    file: str
    doc_index: int
    script_kind: ScriptKind
    leaves: tuple[Leaf, ...]
    directive_table: Mapping[str, str] = field(default_factory=dict)
    # (path, span) of every mapping key that appeared more than once
    duplicate_keys: tuple[tuple[KeyPath, SourceSpan], ...] = ()

    def __post_init__(self) -> None:
        seen = set()
        for leaf in self.leaves:
            if leaf.path in seen:
                raise ValueError(f"duplicate leaf path {leaf.path} in {self.file}")
            seen.add(leaf.path)
            missing = leaf.value.directive_ids - set(self.directive_table)
            if missing:
                raise ValueError(f"unknown directives {sorted(missing)} in {self.file}")

    def __hash__(self) -> int:
        return hash((self.file, self.doc_index))

    def get(self, path: Union[str, KeyPath]) -> Optional[Leaf]:
        if isinstance(path, str):
            path = KeyPath.parse(path)
        return self._index().get(path)

    def value(self, path: Union[str, KeyPath]) -> Optional[str]:
        leaf = self.get(path)
        return None if leaf is None else leaf.value.raw_text

    def under(self, prefix: KeyPath) -> Iterator[Leaf]:
        for leaf in self.leaves:
            if leaf.path.startswith(prefix) and len(leaf.path) > len(prefix):
                yield leaf

    def has_under(self, prefix: KeyPath) -> bool:
        return next(self.under(prefix), None) is not None

    def _index(self) -> dict[KeyPath, Leaf]:
        idx = self.__dict__.get("_leaf_index")
        if idx is None:
            idx = {leaf.path: leaf for leaf in self.leaves}
            object.__setattr__(self, "_leaf_index", idx)
        return idx

    @property
    def kind(self) -> Optional[str]:
        return self._scalar_text("kind")

    @property
    def api_version(self) -> Optional[str]:
        return self._scalar_text("apiVersion")

    @property
    def name(self) -> Optional[str]:
        return self._scalar_text("metadata.name")

    @property
    def namespace(self) -> Optional[str]:
        return self._scalar_text("metadata.namespace")

    def _scalar_text(self, path: str) -> Optional[str]:
        leaf = self.get(path)
        if leaf is None or leaf.value.tag is ScalarTag.NULL:
            return None
        return leaf.value.raw_text

    @property
    def first_span(self) -> SourceSpan:
        if self.leaves:
            return self.leaves[0].span
        return SourceSpan(self.file, 1, 1, 1, 1)


class Severity(str, enum.Enum):
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"

    @property
    def rank(self) -> int:
        return {"info": 0, "warning": 1, "error": 2}[self.value]


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    category: DefectCategory
    location: SourceSpan
    key_path: KeyPath
    message: str
    consequence: Optional[Consequence] = None
    fix_pattern: Optional[FixPattern] = None
    fix_hint: Optional[str] = None
    severity: Severity = Severity.WARNING

    def __post_init__(self) -> None:
        if not self.message:
            raise ValueError("diagnostic message must not be empty")
        if self.consequence is None:
            object.__setattr__(self, "consequence", default_consequence(self.category))
        if self.fix_pattern is None:
            object.__setattr__(self, "fix_pattern", default_fix_pattern(self.category))

    @property
    def file(self) -> str:
        return self.location.file

    @property
    def start_line(self) -> int:
        return self.location.start_line

    def sort_key(self) -> tuple:
        loc = self.location
        # file, line and rule lead; the rest only break ties so the order is total
        return (
            loc.file, loc.start_line, self.rule_id, loc.start_col, str(self.key_path), self.message,
            loc.end_line, loc.end_col, -self.severity.rank, str(self.category),
            self.consequence.value, self.fix_pattern.value, self.fix_hint is None, self.fix_hint or "",
        )


def sort_diagnostics(diags: Sequence[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=Diagnostic.sort_key)
