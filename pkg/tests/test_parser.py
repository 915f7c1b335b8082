import re
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CASES
from kcfglint.model import KeyPath, ScalarTag, ScriptKind
from kcfglint.parser import (
    ScriptSyntaxError,
    UnbalancedDirective,
    export_flat,
    import_flat,
    load_chart,
    mask_text,
    parse_script,
)
from kcfglint.rules import resolve_directive
from oracles import flatten, ruamel_documents

TEMPLATE = """\
apiVersion: apps/v1
kind: Deployment
metadata:
  name: {{ include "trivy-operator.fullname" . }}
spec:
  template:
    spec:
      containers:
        - name: trivy
          {{- if .Values.trivy.enabled }}
          image: "aquasec/trivy:0.29.2"
          {{- end }}
          ports:
            - containerPort: {{ .Values.service.port }}
"""


def test_mask_inline_and_control_directives():
    m = mask_text(TEMPLATE, "d.yaml")
    assert [t.original_text for t in m.tokens] == [
        '{{ include "trivy-operator.fullname" . }}',
        "{{- if .Values.trivy.enabled }}",
        "{{- end }}",
        "{{ .Values.service.port }}",
    ]
    lines = m.text.splitlines()
    assert lines[3] == '  name: "⟦D0⟧"'
    assert lines[9].strip().startswith("#") and len(lines[9]) == len(TEMPLATE.splitlines()[9])
    assert lines[13].endswith('"⟦D3⟧"')


def test_mask_is_identity_without_directives():
    text = "a: 1\nb: [x, y]\n"
    m = mask_text(text)
    assert m.text == text and m.tokens == []


def test_unbalanced_directive():
    with pytest.raises(UnbalancedDirective) as exc:
        parse_script("a: b\nc: {{ .Values.x\n", "t.yaml")
    assert exc.value.span.start_line == 2


line_text = st.text(st.characters(blacklist_characters="{}\n", blacklist_categories=("Cs",)), max_size=12)
directive = st.builds(lambda body: "{{ " + body + " }}", st.from_regex(r"[A-Za-z .|$]{0,10}", fullmatch=True))
line = st.lists(st.one_of(line_text, directive), max_size=4).map("".join)


@settings(max_examples=200)
@given(st.lists(line, max_size=8).map("\n".join))
def test_mask_preserves_lines_and_counts_directives(text):
    m = mask_text(text)
    assert m.text.count("\n") == text.count("\n")
    assert len(m.tokens) == len(re.findall(r"\{\{.*?\}\}", text, re.S))


def test_parse_leaves_and_spans():
    (doc,) = parse_script(TEMPLATE, "d.yaml", ScriptKind.HELM_TEMPLATE)
    image = doc.get("spec.template.spec.containers[0].image")
    assert image.value.raw_text == "aquasec/trivy:0.29.2"
    assert image.value.tag is ScalarTag.STRING
    assert (image.span.start_line, image.span.start_col) == (11, 18)
    port = doc.get("spec.template.spec.containers[0].ports[0].containerPort")
    assert port.value.tag is ScalarTag.DIRECTIVE
    # span covers the original directive text, not the placeholder
    assert (port.span.start_line, port.span.start_col, port.span.end_col) == (14, 30, 56)
    assert doc.directive_table["D3"] == "{{ .Values.service.port }}"


def test_leaf_paths_for_a_plain_manifest():
    text = "apiVersion: v1\nkind: Service\nmetadata:\n  name: web\nspec:\n  ports:\n  - port: 80\n    targetPort: 8080\n"
    (doc,) = parse_script(text)
    assert [(str(leaf.path), leaf.value.raw_text) for leaf in doc.leaves] == [
        ("apiVersion", "v1"),
        ("kind", "Service"),
        ("metadata.name", "web"),
        ("spec.ports[0].port", "80"),
        ("spec.ports[0].targetPort", "8080"),
    ]


def test_multi_document_and_empty():
    assert parse_script("") == []
    assert parse_script("# only a comment\n") == []
    docs = parse_script("a: 1\n---\n---\nb: 2\n")
    assert [d.doc_index for d in docs] == [0, 2]


def test_duplicate_keys_recorded_last_wins():
    (doc,) = parse_script("a: 1\nb: 0\na: 2\n")
    assert doc.value("a") == "2"
    assert [(str(p), s.start_line) for p, s in doc.duplicate_keys] == [("a", 3)]


def test_syntax_error_position():
    with pytest.raises(ScriptSyntaxError) as exc:
        parse_script("a: 1\nb: [1, 2\nc: 3\n", "bad.yaml")
    assert exc.value.span.file == "bad.yaml"
    assert exc.value.span.start_line >= 2


ANCHORS = """\
base: &b
  x: 1
  z: [true, ~, 1.5]
other:
  <<: *b
  z: override
ref: *b
"""


def _typed(doc):
    return {str(leaf.path): leaf.value.to_python() for leaf in doc.leaves}


def test_anchors_and_merge_keys_match_reference_loader():
    (doc,) = parse_script(ANCHORS)
    (expected,) = ruamel_documents(ANCHORS)
    assert _typed(doc) == expected


def _plain_fixture_files():
    for f in sorted(CASES.rglob("*.yaml")):
        if f.name == "cases.yaml" or f.parent.name == "before" and f.parent.parent.name == "bad-indent":
            continue
        if "{{" not in f.read_text():
            yield f


@pytest.mark.parametrize("path", list(_plain_fixture_files()), ids=lambda p: str(p.relative_to(CASES)))
def test_fixture_leaves_match_reference_loader(path: Path):
    text = path.read_text()
    assert [_typed(d) for d in parse_script(text)] == ruamel_documents(text)


@pytest.mark.parametrize("path", sorted(CASES.rglob("*.yaml")), ids=lambda p: str(p.relative_to(CASES)))
def test_flat_round_trip(path: Path):
    try:
        docs = parse_script(path.read_text(), path.name)
    except ScriptSyntaxError as exc:
        docs = exc.documents
    for doc in docs:
        line = export_flat(doc)
        assert "\n" not in line
        back = import_flat(line)
        assert back == doc
        assert export_flat(back) == line


def _write(root: Path, rel: str, text: str) -> None:
    p = root / rel
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def test_load_chart_values_and_resolution(tmp_path):
    _write(tmp_path, "values.yaml", "replicaCount: 2\nservice:\n  scheme: https\n")
    _write(tmp_path, "templates/dep.yaml", "spec:\n  replicas: {{ .Values.replicaCount }}\n  scheme: {{ .Values.service.scheme | quote }}\n  other: {{ .Values.missing }}\n")
    chart = load_chart(tmp_path, base=tmp_path)
    assert chart.values_doc.script_kind is ScriptKind.HELM_VALUES
    assert chart.values_doc.value("service.scheme") == "https"
    (doc,) = chart.templates
    assert doc.file == "templates/dep.yaml"
    assert chart.is_template_file(doc.file)

    from kcfglint.parser import DirectiveToken

    def token(path):
        leaf = doc.get(path)
        (tid,) = leaf.value.directive_ids
        return DirectiveToken(tid, doc.directive_table[tid], leaf.span)

    assert resolve_directive(token("spec.replicas"), chart).to_python() == 2
    assert resolve_directive(token("spec.scheme"), chart).raw_text == "https"
    assert resolve_directive(token("spec.other"), chart) is None


def test_load_chart_empty_directory(tmp_path):
    chart = load_chart(tmp_path)
    assert chart.values_doc is None and chart.templates == () and chart.failures == ()


def test_load_chart_keeps_going_past_a_malformed_template(tmp_path):
    _write(tmp_path, "values.yaml", "a: 1\n")
    _write(tmp_path, "templates/a.yaml", "kind: ConfigMap\n")
    _write(tmp_path, "templates/b.yaml", "kind: [Secret\n")
    _write(tmp_path, "templates/c.yaml", "kind: Service\n")
    chart = load_chart(tmp_path, base=tmp_path)
    assert sorted(d.value("kind") for d in chart.templates) == ["ConfigMap", "Service"]
    assert [f.file for f in chart.failures] == ["templates/b.yaml"]


def test_load_chart_rejects_files(tmp_path):
    f = tmp_path / "values.yaml"
    f.write_text("a: 1\n")
    with pytest.raises(NotADirectoryError):
        load_chart(f)


def test_keypath_lookup_by_string_and_object():
    (doc,) = parse_script("a:\n  b: [x]\n")
    assert doc.get("a.b[0]") == doc.get(KeyPath(("a", "b", 0)))
    assert flatten({"a": {"b": ["x"]}}) == {str(l.path): l.value.raw_text for l in doc.leaves}
