"""Turn Kind scripts and Helm templates into flattened ``ConfigDocument`` leaves.

Helm templates are not valid YAML until rendered, so ``{{ ... }}`` directives
are masked first: an inline directive becomes a placeholder scalar such as
``"⟦D0⟧"``, and a line holding nothing but directives (``{{- if ... }}``,
``{{ end }}``, ``{{ toYaml ... | nindent 4 }}``) becomes a comment line of the
same length. Positions reported by the YAML composer are translated back to
the original file text through a piecewise offset map.
"""

from __future__ import annotations

import bisect
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import yaml

from .model import (
    PLACEHOLDER_CLOSE,
    PLACEHOLDER_OPEN,
    ROOT,
    ConfigDocument,
    KeyPath,
    Leaf,
    ScalarTag,
    ScalarValue,
    ScriptKind,
    SourceSpan,
)

try:
    _Loader = yaml.CSafeLoader
except AttributeError:  # pragma: no cover - libyaml missing
    _Loader = yaml.SafeLoader

YAML_SUFFIXES = (".yaml", ".yml")

_TAGS = {
    "tag:yaml.org,2002:str": ScalarTag.STRING,
    "tag:yaml.org,2002:int": ScalarTag.INT,
    "tag:yaml.org,2002:float": ScalarTag.FLOAT,
    "tag:yaml.org,2002:bool": ScalarTag.BOOL,
    "tag:yaml.org,2002:null": ScalarTag.NULL,
}
_MERGE_TAG = "tag:yaml.org,2002:merge"


class ScriptSyntaxError(ValueError):
    """Malformed YAML (or template) text.

    ``documents`` holds whatever was parsed before the error was hit.
    """

    def __init__(self, span: SourceSpan, detail: str, documents: Sequence[ConfigDocument] = ()):
        super().__init__(f"{span.file}:{span.start_line}:{span.start_col}: {detail}")
        self.span = span
        self.detail = detail
        self.documents = list(documents)


class UnbalancedDirective(ScriptSyntaxError):
    pass


@dataclass(frozen=True)
class DirectiveToken:
    id: str
    original_text: str
    span: SourceSpan

    @property
    def references_values(self) -> bool:
        return ".Values" in self.original_text


def placeholder(token_id: str) -> str:
    return f"{PLACEHOLDER_OPEN}{token_id}{PLACEHOLDER_CLOSE}"


# --------------------------------------------------------------------------
# masking


def _line_starts(text: str) -> list[int]:
    starts = [0]
    for m in re.finditer("\n", text):
        starts.append(m.end())
    return starts


def _offset_to_linecol(starts: list[int], offset: int) -> tuple[int, int]:
    line = bisect.bisect_right(starts, offset) - 1
    return line + 1, offset - starts[line] + 1


_COMMENT_OPEN = re.compile(r"[ \t\r\n]*/\*")


def _find_directives(text: str, file: str) -> list[tuple[int, int]]:
    """Offsets of every ``{{ ... }}`` span, aware of Go string literals and comments."""
    spans = []
    i = 0
    n = len(text)
    while True:
        start = text.find("{{", i)
        if start < 0:
            return spans
        j = start + 2
        if text.startswith("-", j):
            j += 1
        if _COMMENT_OPEN.match(text, j):
            close = text.find("*/", j)
            end = text.find("}}", close + 2) if close >= 0 else -1
        else:
            end = -1
            while j < n:
                ch = text[j]
                if ch == '"':
                    j += 1
                    while j < n and text[j] != '"' and text[j] != "\n":
                        j += 2 if text[j] == "\\" else 1
                elif ch == "`":
                    close = text.find("`", j + 1)
                    j = n if close < 0 else close
                elif ch == "}" and text.startswith("}}", j):
                    end = j
                    break
                j += 1
        if end < 0:
            line, col = _offset_to_linecol(_line_starts(text), start)
            raise UnbalancedDirective(
                SourceSpan(file, line, col, line, col + 2), "'{{' has no matching '}}'"
            )
        spans.append((start, end + 2))
        i = end + 2


_SCALAR_START = re.compile(r"(?:(?:^|\s)-\s+|:\s+|(?:^|\s)\?\s+|[\[{,]\s*)$")


def _starts_scalar(prefix: str) -> bool:
    return not prefix.strip() or bool(_SCALAR_START.search(prefix))


def _ends_scalar(rest: str) -> bool:
    if not rest or rest[0] in ",]}":
        return True
    if rest[0] == ":" and (len(rest) == 1 or rest[1].isspace()):
        return True
    if rest[0].isspace():
        tail = rest.lstrip(" \t\r")
        return not tail or tail.startswith("#")
    return False


class PositionMap:
    """Maps (line, col) positions in masked text back to the original text."""

    def __init__(self, original: str, masked: str, pieces: list[tuple[int, int, int, int, bool]]):
        # pieces: (masked_start, masked_len, orig_start, orig_len, is_copy)
        self._pieces = pieces
        self._m_starts = [p[0] for p in pieces]
        self._m_lines = _line_starts(masked)
        self._o_lines = _line_starts(original)
        self._identity = len(pieces) <= 1 and (not pieces or pieces[0][4])

    def original_offset(self, line0: int, col0: int) -> int:
        line0 = min(line0, len(self._m_lines) - 1)
        off = self._m_lines[line0] + col0
        if self._identity:
            return off
        idx = max(bisect.bisect_right(self._m_starts, off) - 1, 0)
        m_start, m_len, o_start, o_len, is_copy = self._pieces[idx]
        if is_copy:
            return o_start + min(off - m_start, o_len)
        return o_start if off < m_start + m_len else o_start + o_len

    def to_original(self, line0: int, col0: int) -> tuple[int, int]:
        """0-based masked position -> 1-based original (line, col)."""
        return _offset_to_linecol(self._o_lines, self.original_offset(line0, col0))


@dataclass
class MaskedText:
    original: str
    text: str
    tokens: list[DirectiveToken]
    positions: PositionMap


def mask_text(text: str, file: str = "<string>") -> MaskedText:
    spans = _find_directives(text, file)
    o_lines = _line_starts(text)
    if not spans:
        return MaskedText(text, text, [], PositionMap(text, text, [(0, len(text), 0, len(text), True)]))

    def line_of(offset: int) -> int:
        return bisect.bisect_right(o_lines, offset) - 1

    # lines consisting only of whitespace and directive text
    covered: dict[int, list[tuple[int, int]]] = {}
    for s, e in spans:
        for ln in range(line_of(s), line_of(e - 1) + 1):
            covered.setdefault(ln, []).append((s, e))
    directive_only = set()
    for ln, parts in covered.items():
        ls = o_lines[ln]
        le = o_lines[ln + 1] - 1 if ln + 1 < len(o_lines) else len(text)
        chars = list(text[ls:le])
        for s, e in parts:
            for k in range(max(s, ls), min(e, le)):
                chars[k - ls] = " "
        if not "".join(chars).strip():
            directive_only.add(ln)
    line_only = [
        all(ln in directive_only for ln in range(line_of(s), line_of(e - 1) + 1)) for s, e in spans
    ]
    comment_lines = set(directive_only)
    for (s, e), whole in zip(spans, line_only):
        if not whole:
            comment_lines.difference_update(range(line_of(s), line_of(e - 1) + 1))

    tokens: list[DirectiveToken] = []
    for k, (s, e) in enumerate(spans):
        sl, sc = _offset_to_linecol(o_lines, s)
        el, ec = _offset_to_linecol(o_lines, e)
        tokens.append(DirectiveToken(f"D{k}", text[s:e], SourceSpan(file, sl, sc, el, ec)))

    out: list[str] = []
    pieces: list[tuple[int, int, int, int, bool]] = []
    m_pos = 0

    def emit(chunk: str, o_start: int, o_len: int, is_copy: bool) -> None:
        nonlocal m_pos
        if not chunk and not o_len:
            return
        out.append(chunk)
        pieces.append((m_pos, len(chunk), o_start, o_len, is_copy))
        m_pos += len(chunk)

    pending_newlines = 0
    pos = 0
    spans_iter = iter(enumerate(spans))
    nxt = next(spans_iter, None)
    n = len(text)
    line_buf_start = 0  # index into ``out`` where the current masked line began
    while pos < n or nxt is not None:
        ln = line_of(pos) if pos < n else len(o_lines) - 1
        if pos < n and ln in comment_lines and pos == o_lines[ln]:
            le = o_lines[ln + 1] - 1 if ln + 1 < len(o_lines) else n
            raw = text[pos:le]
            indent = len(raw) - len(raw.lstrip(" \t"))
            repl = raw[:indent] + ("#" + " " * (len(raw) - indent - 1) if len(raw) > indent else "")
            emit(repl, pos, le - pos, True)
            pos = le
            while nxt is not None and nxt[1][0] < le:
                nxt = next(spans_iter, None)
            continue
        if nxt is not None and nxt[1][0] == pos:
            k, (s, e) = nxt
            tok = tokens[k]
            prefix = "".join(out[line_buf_start:])
            rest_end = text.find("\n", e)
            rest = text[e : (n if rest_end < 0 else rest_end)]
            ph = placeholder(tok.id)
            if _starts_scalar(prefix) and _ends_scalar(rest):
                ph = f'"{ph}"'
            emit(ph, s, e - s, False)
            pending_newlines += text.count("\n", s, e)
            pos = e
            nxt = next(spans_iter, None)
            continue
        if pos >= n:
            break
        # copy plain text up to the next directive or end of line
        stop = n
        if nxt is not None:
            stop = min(stop, nxt[1][0])
        nl = text.find("\n", pos)
        if nl >= 0 and nl < stop:
            emit(text[pos:nl], pos, nl - pos, True)
            if pending_newlines:
                emit("\n" * pending_newlines, nl, 0, False)
                pending_newlines = 0
            emit("\n", nl, 1, True)
            pos = nl + 1
            line_buf_start = len(out)
        else:
            emit(text[pos:stop], pos, stop - pos, True)
            pos = stop
    if pending_newlines:
        emit("\n" * pending_newlines, n, 0, False)
    masked = "".join(out)
    return MaskedText(text, masked, tokens, PositionMap(text, masked, pieces))


def mask_directives(text: str, file: str = "<string>") -> tuple[str, list[DirectiveToken]]:
    masked = mask_text(text, file)
    return masked.text, masked.tokens


# --------------------------------------------------------------------------
# flattening


class _Flattener:
    def __init__(self, file: str, positions: PositionMap):
        self.file = file
        self.positions = positions
        self.leaves: list[Leaf] = []
        self.duplicates: list[tuple[KeyPath, SourceSpan]] = []
        self._active: set[int] = set()

    def span(self, node) -> SourceSpan:
        sl, sc = self.positions.to_original(node.start_mark.line, node.start_mark.column)
        el, ec = self.positions.to_original(node.end_mark.line, node.end_mark.column)
        if (el, ec) < (sl, sc):
            el, ec = sl, sc
        return SourceSpan(self.file, sl, sc, el, ec)

    def walk(self, node, path: KeyPath) -> None:
        if isinstance(node, yaml.ScalarNode):
            tag = _TAGS.get(node.tag, ScalarTag.STRING)
            self.leaves.append(Leaf(path, ScalarValue.from_text(node.value, tag), self.span(node)))
            return
        if id(node) in self._active:
            return  # recursive alias
        self._active.add(id(node))
        try:
            if isinstance(node, yaml.SequenceNode):
                for i, item in enumerate(node.value):
                    self.walk(item, path / i)
            elif isinstance(node, yaml.MappingNode):
                for key, value in self.mapping_items(node, path).values():
                    self.walk(value, path / key)
        finally:
            self._active.discard(id(node))

    def mapping_items(self, node, path: KeyPath, record: bool = True) -> dict:
        merged: dict = {}
        explicit: dict = {}
        for key_node, value_node in node.value:
            if key_node.tag == _MERGE_TAG or (
                isinstance(key_node, yaml.ScalarNode) and key_node.value == "<<" and key_node.style in (None, "")
            ):
                sources = value_node.value if isinstance(value_node, yaml.SequenceNode) else [value_node]
                for src in reversed(sources):
                    if isinstance(src, yaml.MappingNode):
                        merged.update(self.mapping_items(src, path, record=False))
                continue
            key = self.key_text(key_node)
            if key in explicit:
                if record:
                    self.duplicates.append((path / key, self.span(key_node)))
                del explicit[key]
            explicit[key] = (key, value_node)
        merged.update(explicit)
        return merged

    @staticmethod
    def key_text(node) -> str:
        if isinstance(node, yaml.ScalarNode):
            return node.value
        return f"?{node.start_mark.line + 1}:{node.start_mark.column + 1}"


def _is_empty(node) -> bool:
    return node is None or (
        isinstance(node, yaml.ScalarNode) and node.tag == "tag:yaml.org,2002:null" and node.value == ""
    )


def parse_masked(masked: MaskedText, file: str, script_kind: ScriptKind) -> list[ConfigDocument]:
    docs: list[ConfigDocument] = []
    roots = []
    tokens = masked.tokens
    try:
        for root in yaml.compose_all(masked.text, Loader=_Loader):
            roots.append(root)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None) or getattr(exc, "context_mark", None)
        if mark is not None:
            line, col = masked.positions.to_original(mark.line, mark.column)
        else:
            line, col = 1, 1
        detail = getattr(exc, "problem", None) or str(exc)
        partial = _build_documents(roots, masked, file, script_kind, tokens)
        raise ScriptSyntaxError(SourceSpan(file, line, col, line, col), detail, partial) from exc
    docs = _build_documents(roots, masked, file, script_kind, tokens)
    return docs


def _build_documents(roots, masked: MaskedText, file: str, script_kind: ScriptKind, tokens) -> list[ConfigDocument]:
    docs = []
    # token -> document assignment by the original line where each root ends
    ends = []
    for root in roots:
        if root is None:
            ends.append(0)
        else:
            ends.append(masked.positions.to_original(root.end_mark.line, root.end_mark.column)[0])
    assigned: dict[int, dict[str, str]] = {i: {} for i in range(len(roots))}
    for tok in tokens:
        idx = next((i for i, end in enumerate(ends) if tok.span.start_line <= end), len(roots) - 1)
        if idx >= 0:
            assigned[idx][tok.id] = tok.original_text
    for index, root in enumerate(roots):
        if _is_empty(root):
            continue
        flat = _Flattener(file, masked.positions)
        flat.walk(root, ROOT)
        leaves = sorted(flat.leaves, key=lambda lf: (lf.span.start_line, lf.span.start_col))
        table = dict(assigned.get(index, {}))
        by_id = {t.id: t.original_text for t in tokens}
        for leaf in leaves:
            for d in leaf.value.directive_ids:
                table.setdefault(d, by_id[d])
        table = dict(sorted(table.items(), key=lambda kv: int(kv[0][1:])))
        docs.append(
            ConfigDocument(
                file=file,
                doc_index=index,
                script_kind=script_kind,
                leaves=tuple(leaves),
                directive_table=table,
                duplicate_keys=tuple(flat.duplicates),
            )
        )
    return docs


def parse_script(
    text: str, file: str = "<string>", script_kind: ScriptKind = ScriptKind.KIND
) -> list[ConfigDocument]:
    """Parse every ``---``-separated document of ``text``.

    Directives are masked as part of parsing. Raises ``ScriptSyntaxError`` on
    malformed input.
    """
    return parse_masked(mask_text(text, file), file, script_kind)


# --------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class ParseFailure:
    span: SourceSpan
    detail: str

    @property
    def file(self) -> str:
        return self.span.file


@dataclass(frozen=True)
class HelmChart:
    root: str
    values_doc: Optional[ConfigDocument] = None
    templates: tuple[ConfigDocument, ...] = ()
    failures: tuple[ParseFailure, ...] = ()

    def is_template_file(self, file: str) -> bool:
        root = self.root.rstrip("/")
        prefix = f"{root}/templates/" if root not in ("", ".") else "templates/"
        return file.startswith(prefix)


def relative_name(path: Path, base: Optional[Path]) -> str:
    if base is None:
        return path.as_posix()
    try:
        return path.relative_to(base).as_posix()
    except ValueError:
        return path.as_posix()


def read_text(path: Path) -> str:
    return path.read_text(encoding="utf-8", errors="replace")


@dataclass
class FileResult:
    file: str
    documents: list[ConfigDocument] = field(default_factory=list)
    failure: Optional[ParseFailure] = None


def parse_file(path: str, name: str, script_kind: ScriptKind) -> FileResult:
    """Parse one file from disk; syntax errors are captured, not raised."""
    try:
        text = read_text(Path(path))
    except OSError as exc:
        return FileResult(name, [], ParseFailure(SourceSpan(name, 1, 1, 1, 1), f"cannot read file: {exc}"))
    try:
        return FileResult(name, parse_script(text, name, script_kind))
    except ScriptSyntaxError as exc:
        return FileResult(name, exc.documents, ParseFailure(exc.span, exc.detail))


def template_files(root: Path) -> list[Path]:
    tdir = root / "templates"
    if not tdir.is_dir():
        return []
    return sorted(p for p in tdir.rglob("*") if p.is_file() and p.suffix in YAML_SUFFIXES)


def load_chart(root, base=None) -> HelmChart:
    """Parse ``values.yaml`` and every YAML file under ``templates/``.

    File names in the resulting documents are relative to ``base`` (default:
    left as given).
    """
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(str(root))
    base = Path(base) if base is not None else None
    values_doc = None
    failures: list[ParseFailure] = []
    for candidate in ("values.yaml", "values.yml"):
        vpath = root / candidate
        if vpath.is_file():
            res = parse_file(str(vpath), relative_name(vpath, base), ScriptKind.HELM_VALUES)
            if res.failure:
                failures.append(res.failure)
            if res.documents and values_doc is None:
                values_doc = res.documents[0]
    templates: list[ConfigDocument] = []
    for tpath in template_files(root):
        res = parse_file(str(tpath), relative_name(tpath, base), ScriptKind.HELM_TEMPLATE)
        templates.extend(res.documents)
        if res.failure:
            failures.append(res.failure)
    return HelmChart(relative_name(root, base), values_doc, tuple(templates), tuple(failures))


# --------------------------------------------------------------------------
# flat export


def export_flat(doc: ConfigDocument) -> str:
    """One JSON object (single line) holding the document's key/value leaves."""
    record = {
        "file": doc.file,
        "doc_index": doc.doc_index,
        "script_kind": doc.script_kind.value,
        "leaves": [
            {
                "path": str(leaf.path),
                "value": leaf.value.raw_text,
                "tag": leaf.value.tag.value,
                "line": leaf.span.start_line,
                "span": [leaf.span.start_line, leaf.span.start_col, leaf.span.end_line, leaf.span.end_col],
            }
            for leaf in doc.leaves
        ],
        "directives": dict(doc.directive_table),
        "duplicate_keys": [
            [str(p), [s.start_line, s.start_col, s.end_line, s.end_col]] for p, s in doc.duplicate_keys
        ],
    }
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def import_flat(line: str) -> ConfigDocument:
    rec = json.loads(line)
    file = rec["file"]
    leaves = []
    for item in rec["leaves"]:
        sl, sc, el, ec = item.get("span") or [item["line"], 1, item["line"], 1]
        tag = ScalarTag(item["tag"])
        value = ScalarValue.from_text(item["value"], tag if tag is not ScalarTag.DIRECTIVE else ScalarTag.STRING)
        leaves.append(Leaf(KeyPath.parse(item["path"]), value, SourceSpan(file, sl, sc, el, ec)))
    dups = tuple(
        (KeyPath.parse(p), SourceSpan(file, *pos)) for p, pos in rec.get("duplicate_keys", [])
    )
    return ConfigDocument(
        file=file,
        doc_index=rec["doc_index"],
        script_kind=ScriptKind(rec["script_kind"]),
        leaves=tuple(leaves),
        directive_table=dict(rec.get("directives", {})),
        duplicate_keys=dups,
    )


def write_flat(docs: Iterable[ConfigDocument], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            fh.write(export_flat(doc) + "\n")


def read_flat(path) -> list[ConfigDocument]:
    with open(path, encoding="utf-8") as fh:
        return [import_flat(line) for line in fh if line.strip()]
