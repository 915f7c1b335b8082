import json

import jsonschema
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CASES
from kcfglint.corpus import build_corpus
from kcfglint.model import ROOT, Diagnostic, KeyPath, Severity, SourceSpan
from kcfglint.report import (
    Report,
    UnsupportedFormat,
    emit,
    emit_json,
    emit_sarif,
    emit_text,
    exit_code,
    format_line,
    suggest_fix,
)
from kcfglint.rules import default_registry, run_rules
from kcfglint.taxonomy import Category, DefectCategory, FixPattern, SubCategory


def _scan(root):
    return Report.build(run_rules(build_corpus(root)), rules=default_registry().descriptions())


def test_text_line_for_removed_api():
    report = _scan(CASES / "removed-api" / "before")
    (line, summary) = emit_text(report).splitlines()
    assert line.startswith("deployment.yaml:1:")
    assert "[VERSION_INCOMPAT/VersionIncompatibility]" in line
    assert "extensions/v1beta1" in line and "apps/v1" in line
    assert summary == "1 defect (VersionIncompatibility: 1)"


def test_empty_report():
    report = Report.build([])
    assert emit_text(report) == "0 defects\n"
    sarif = json.loads(emit_sarif(report))
    assert sarif["runs"][0]["results"] == []
    assert json.loads(emit_json(report))["summary"] == {"total": 0, "by_category": {}}


def test_sarif_is_schema_valid(all_before, sarif_schema):
    report = _scan(all_before)
    doc = json.loads(emit_sarif(report, timestamp="2024-01-01T00:00:00Z"))
    jsonschema.Draft202012Validator(sarif_schema).validate(doc)
    results = doc["runs"][0]["results"]
    assert len(results) == len(report.diagnostics)
    rules = doc["runs"][0]["tool"]["driver"]["rules"]
    for r in results:
        assert rules[r["ruleIndex"]]["id"] == r["ruleId"]
        assert r["properties"]["keyPath"] == r["locations"][0]["logicalLocations"][0]["fullyQualifiedName"]


def test_sarif_with_tool_errors_is_schema_valid(sarif_schema):
    report = Report.build([], tool_errors=["rule X failed on a.yaml"])
    doc = json.loads(emit_sarif(report))
    jsonschema.Draft202012Validator(sarif_schema).validate(doc)
    assert doc["runs"][0]["invocations"][0]["executionSuccessful"] is False


def test_json_round_trip(all_before):
    report = _scan(all_before)
    text = emit_json(report)
    back = Report.from_dict(json.loads(text))
    assert back == report
    assert emit_json(back) == text


def _diag(cat, hint=None, severity=None, **kw):
    return Diagnostic(
        rule_id="R",
        category=cat,
        location=SourceSpan("a.yaml", 1, 1, 1, 2),
        key_path=kw.pop("key_path", ROOT),
        message="m",
        fix_hint=hint,
        **({"severity": severity} if severity else {}),
        **kw,
    )


def test_suggest_fix():
    helm = _diag(DefectCategory(Category.INCORRECT_HELMING), hint="{{ .Values.image.repository }}")
    assert ".Values" in suggest_fix(helm)
    version = _diag(DefectCategory(Category.VERSION_INCOMPATIBILITY), hint="apiVersion: apps/v1")
    assert "apps/v1" in suggest_fix(version)
    probe = _diag(DefectCategory(Category.PROBING))
    assert probe.fix_pattern is FixPattern.PM
    assert suggest_fix(probe) == FixPattern.PM.definition
    assert format_line(probe).endswith(f"(Outage; fix: PM: {FixPattern.PM.definition})")


def test_unknown_format():
    with pytest.raises(UnsupportedFormat):
        emit(Report.build([]), "xml")


def test_exit_codes():
    warn = _diag(DefectCategory(Category.PROBING), severity=Severity.WARNING)
    err = _diag(DefectCategory(Category.SECURITY, SubCategory.AC), severity=Severity.ERROR)
    assert exit_code([]) == 0
    assert exit_code([warn]) == 0
    assert exit_code([warn], fail_on=Severity.WARNING) == 1
    assert exit_code([warn], fail_on=Severity.INFO) == 1
    assert exit_code([err, warn]) == 1
    assert exit_code([], tool_error=True) == 2


def test_report_rejects_inconsistent_counts():
    d = _diag(DefectCategory(Category.PROBING))
    with pytest.raises(ValueError):
        Report((d,), counts={})


keys = st.lists(st.one_of(st.text(min_size=1, max_size=5), st.integers(0, 9)), max_size=4)
diags = st.lists(
    st.builds(
        lambda f, line, rule, kp, cat, sev: Diagnostic(
            rule_id=rule,
            category=DefectCategory(cat),
            location=SourceSpan(f, line, 1, line, 3),
            key_path=KeyPath(tuple(kp)),
            message="msg é",
            severity=sev,
        ),
        st.sampled_from(["a.yaml", "dir/b.yaml", "c d.yml"]),
        st.integers(1, 50),
        st.sampled_from(["R1", "R2"]),
        keys,
        st.sampled_from(list(Category)),
        st.sampled_from(list(Severity)),
    ),
    max_size=6,
)


@settings(max_examples=60)
@given(diags)
def test_emitters_are_stable_under_input_order(ds):
    a = Report.build(ds)
    b = Report.build(list(reversed(ds)))
    for fmt in ("text", "json", "sarif"):
        assert emit(a, fmt) == emit(b, fmt)
    assert Report.from_dict(json.loads(emit(a, "json"))) == a
