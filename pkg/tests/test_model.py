import pytest
from hypothesis import given
from hypothesis import strategies as st

from kcfglint.model import (
    ROOT,
    ConfigDocument,
    Diagnostic,
    KeyPath,
    Leaf,
    ScalarTag,
    ScalarValue,
    ScriptKind,
    Severity,
    SourceSpan,
    sort_diagnostics,
)
from kcfglint.taxonomy import Category, Consequence, DefectCategory, FixPattern

plain_keys = st.text(st.characters(blacklist_characters=".[]\"", blacklist_categories=("Cs",)), min_size=1)
any_keys = st.text(st.characters(blacklist_categories=("Cs",)))
segments = st.lists(st.one_of(plain_keys, st.integers(min_value=0, max_value=10**6)), max_size=8)


@given(segments)
def test_keypath_round_trip_plain_keys(segs):
    path = KeyPath(tuple(segs))
    assert KeyPath.parse(str(path)) == path


@given(st.lists(st.one_of(any_keys, st.integers(min_value=0, max_value=99)), max_size=6))
def test_keypath_round_trip_any_keys(segs):
    path = KeyPath(tuple(segs))
    assert KeyPath.parse(str(path)) == path


def test_keypath_rendering():
    assert str(KeyPath(("spec", "containers", 0, "image"))) == "spec.containers[0].image"
    assert str(ROOT) == ""
    assert KeyPath.parse("") == ROOT
    assert str(KeyPath(("metadata", "annotations", "helm.sh/hook"))) == 'metadata.annotations["helm.sh/hook"]'
    assert str(KeyPath((0, "a"))) == "[0].a"


@pytest.mark.parametrize("bad", ["a..b", "a[", "a[x]", "a.", "[-1]", ".a"])
def test_keypath_parse_rejects(bad):
    with pytest.raises(ValueError):
        KeyPath.parse(bad)


def test_keypath_helpers():
    p = KeyPath.parse("spec.template.spec.containers[1].image")
    assert p.terminal_key == "image"
    assert p.startswith(KeyPath.parse("spec.template"))
    assert not p.startswith(KeyPath.parse("spec.tem"))
    assert p.parent == KeyPath.parse("spec.template.spec.containers[1]")
    assert KeyPath.parse("a[3]").terminal_key == "a"
    assert KeyPath.parse("[3]").terminal_key is None


def test_span_order_enforced():
    SourceSpan("f", 1, 1, 1, 1)
    with pytest.raises(ValueError):
        SourceSpan("f", 2, 1, 1, 5)


def test_scalar_directive_invariant():
    assert ScalarValue.from_text("data-⟦D3⟧", ScalarTag.STRING).tag is ScalarTag.DIRECTIVE
    assert ScalarValue.from_text("plain", ScalarTag.STRING).directive_ids == frozenset()
    with pytest.raises(ValueError):
        ScalarValue("x", ScalarTag.DIRECTIVE)
    with pytest.raises(ValueError):
        ScalarValue("⟦D0⟧", ScalarTag.STRING, frozenset({"D0"}))


def test_scalar_to_python():
    assert ScalarValue("80", ScalarTag.INT).to_python() == 80
    assert ScalarValue("true", ScalarTag.BOOL).to_python() is True
    assert ScalarValue("~", ScalarTag.NULL).to_python() is None
    assert ScalarValue("1.5", ScalarTag.FLOAT).to_python() == 1.5


def _leaf(path, raw, tag=ScalarTag.STRING, line=1):
    return Leaf(KeyPath.parse(path), ScalarValue.from_text(raw, tag), SourceSpan("f.yaml", line, 1, line, 2))


def test_document_invariants():
    with pytest.raises(ValueError):
        ConfigDocument("f.yaml", 0, ScriptKind.KIND, (_leaf("a", "1"), _leaf("a", "2", line=2)))
    with pytest.raises(ValueError):
        ConfigDocument("f.yaml", 0, ScriptKind.KIND, (_leaf("a", "⟦D0⟧"),), directive_table={})
    doc = ConfigDocument(
        "f.yaml",
        0,
        ScriptKind.KIND,
        (_leaf("apiVersion", "v1"), _leaf("kind", "Pod", line=2), _leaf("metadata.name", "mypod", line=3)),
    )
    assert (doc.kind, doc.api_version, doc.name, doc.namespace) == ("Pod", "v1", "mypod", None)


def _diag(**kw):
    base = dict(
        rule_id="R",
        category=DefectCategory(Category.ORPHANISM),
        location=SourceSpan("a.yaml", 3, 1, 3, 4),
        key_path=ROOT,
        message="m",
    )
    base.update(kw)
    return Diagnostic(**base)


def test_diagnostic_defaults_from_modal_lookup():
    d = _diag()
    assert d.consequence is Consequence.PERFORMANCE
    assert d.fix_pattern is FixPattern.OM
    assert d.severity is Severity.WARNING
    assert _diag(fix_pattern=FixPattern.CVC).fix_pattern is FixPattern.CVC


def test_diagnostic_rejects_empty_message():
    with pytest.raises(ValueError):
        _diag(message="")


def test_sort_order_file_line_rule():
    a = _diag(rule_id="B", location=SourceSpan("a.yaml", 2, 1, 2, 1))
    b = _diag(rule_id="A", location=SourceSpan("a.yaml", 2, 1, 2, 1))
    c = _diag(rule_id="A", location=SourceSpan("a.yaml", 10, 1, 10, 1))
    d = _diag(rule_id="A", location=SourceSpan("b.yaml", 1, 1, 1, 1))
    assert sort_diagnostics([d, c, a, b]) == [b, a, c, d]
