"""Extended rule pack for the statically detectable taxonomy categories."""

from __future__ import annotations

import re
from typing import Iterator, Optional

from ..model import PLACEHOLDER_RE, ROOT, ConfigDocument, Diagnostic, KeyPath, Leaf, ScalarTag, Severity
from ..taxonomy import Category, DefectCategory, FixPattern, SubCategory
from .graph import _list_indices, plain_text, pod_spec_path

MAX_NAME_LENGTH = 63
PRIVILEGED_PORT_LIMIT = 1024

VERSION = DefectCategory(Category.VERSION_INCOMPATIBILITY)
NAME_VR = DefectCategory(Category.DATA_FIELDS, SubCategory.VR)
SYNTAX = DefectCategory(Category.DATA_FIELDS, SubCategory.SYNTAX)
PORT = DefectCategory(Category.SECURITY, SubCategory.PP)
ACCESS = DefectCategory(Category.SECURITY, SubCategory.AC)
CONTEXT = DefectCategory(Category.SECURITY, SubCategory.SC)
PROBING = DefectCategory(Category.PROBING)


def check_version_incompat(doc: ConfigDocument, ctx) -> Iterator[Diagnostic]:
    leaf = doc.get("apiVersion")
    api, kind = plain_text(leaf), plain_text(doc.get("kind"))
    if api is None or kind is None:
        return
    replacement = ctx.config.deprecated_replacement(api, kind)
    if replacement is None:
        return
    yield Diagnostic(
        rule_id="VERSION_INCOMPAT",
        category=VERSION,
        location=leaf.span,
        key_path=leaf.path,
        message=f"apiVersion {api} is no longer served for {kind}",
        fix_hint=f"apiVersion: {replacement}",
        severity=Severity.ERROR,
    )


def _is_name_leaf(path: KeyPath) -> bool:
    segs = path.segments
    return len(segs) >= 2 and segs[-2] == "metadata" and segs[-1] in ("name", "generateName")


def check_name_too_long(doc: ConfigDocument, ctx) -> Iterator[Diagnostic]:
    for leaf in doc.leaves:
        if not _is_name_leaf(leaf.path) or leaf.value.tag is ScalarTag.NULL:
            continue
        # templated parts have unknown length; judge the literal text alone
        literal = PLACEHOLDER_RE.sub("", leaf.value.raw_text)
        if len(literal) <= MAX_NAME_LENGTH:
            continue
        yield Diagnostic(
            rule_id="NAME_TOO_LONG",
            category=NAME_VR,
            location=leaf.span,
            key_path=leaf.path,
            message=f"name is {len(literal)} characters long; Kubernetes allows at most {MAX_NAME_LENGTH}",
            fix_pattern=FixPattern.CVC,
            fix_hint=f"shorten to {MAX_NAME_LENGTH} characters, e.g. {{{{ ... | trunc {MAX_NAME_LENGTH} | trimSuffix \"-\" }}}}",
            severity=Severity.ERROR,
        )


def check_syntax(ctx) -> Iterator[Diagnostic]:
    for failure in ctx.corpus.failures:
        yield Diagnostic(
            rule_id="SYNTAX",
            category=SYNTAX,
            location=failure.span,
            key_path=ROOT,
            message=f"YAML does not parse: {failure.detail}",
            severity=Severity.ERROR,
        )
    for doc in ctx.corpus.documents:
        for path, span in doc.duplicate_keys:
            yield Diagnostic(
                rule_id="SYNTAX",
                category=SYNTAX,
                location=span,
                key_path=path,
                message=f"key '{path.terminal_key}' is repeated; only the last value is used",
                severity=Severity.WARNING,
            )


_SECURE_PORT = re.compile(r"--secure-port=(\d+)\b")


def _container_paths(doc: ConfigDocument, pod: KeyPath, keys=("containers", "initContainers")) -> list[KeyPath]:
    out = []
    for key in keys:
        base = pod / key
        out.extend(base / i for i in _list_indices(doc, base))
    return out


def check_privileged_port(doc: ConfigDocument, ctx) -> Iterator[Diagnostic]:
    pod = pod_spec_path(doc)
    if pod is None:
        return
    for container in _container_paths(doc, pod):
        ports = container / "ports"
        for i in _list_indices(doc, ports):
            leaf = doc.get(ports / i / "containerPort")
            if leaf is None or leaf.value.tag is not ScalarTag.INT:
                continue
            port = leaf.value.to_python()
            if 0 < port < PRIVILEGED_PORT_LIMIT:
                yield _port_diag(leaf, port, f"containerPort: {port + 8000}")
        for key in ("args", "command"):
            base = container / key
            for i in _list_indices(doc, base):
                leaf = doc.get(base / i)
                if leaf is None or leaf.value.tag is not ScalarTag.STRING:
                    continue
                m = _SECURE_PORT.search(leaf.value.raw_text)
                if m and int(m.group(1)) < PRIVILEGED_PORT_LIMIT:
                    port = int(m.group(1))
                    yield _port_diag(leaf, port, f"--secure-port={port + 8000}")


def _port_diag(leaf: Leaf, port: int, hint: str) -> Diagnostic:
    return Diagnostic(
        rule_id="PRIVILEGED_PORT",
        category=PORT,
        location=leaf.span,
        key_path=leaf.path,
        message=f"port {port} is privileged (below {PRIVILEGED_PORT_LIMIT}) and needs elevated rights to bind",
        fix_pattern=FixPattern.CVC,
        fix_hint=f"use an unprivileged port, e.g. {hint}",
        severity=Severity.WARNING,
    )


RBAC_KINDS = ("Role", "ClusterRole")


def check_wildcard_rbac(doc: ConfigDocument, ctx) -> Iterator[Diagnostic]:
    if plain_text(doc.get("kind")) not in RBAC_KINDS:
        return
    rules = KeyPath(("rules",))
    for leaf in doc.under(rules):
        segs = leaf.path.segments
        if len(segs) == 4 and isinstance(segs[1], int) and segs[2] in ("apiGroups", "resources", "verbs"):
            if leaf.value.tag is ScalarTag.STRING and leaf.value.raw_text.strip() == "*":
                yield Diagnostic(
                    rule_id="WILDCARD_RBAC",
                    category=ACCESS,
                    location=leaf.span,
                    key_path=leaf.path,
                    message=f"'*' in {segs[2]} grants access to everything in that dimension",
                    severity=Severity.WARNING,
                )


def _runs_as_non_root(doc: ConfigDocument, ctx_path: KeyPath) -> bool:
    user = doc.get(ctx_path / "runAsUser")
    if user is not None and user.value.tag is not ScalarTag.NULL:
        if user.value.tag is ScalarTag.DIRECTIVE or user.value.raw_text.strip() not in ("0",):
            return True
    non_root = doc.get(ctx_path / "runAsNonRoot")
    if non_root is not None:
        if non_root.value.tag is ScalarTag.DIRECTIVE:
            return True
        if non_root.value.tag is ScalarTag.BOOL and non_root.value.to_python() is True:
            return True
    whole = doc.get(ctx_path)
    # ``securityContext:`` filled in by a template block or a single directive
    return whole is not None and whole.value.tag in (ScalarTag.NULL, ScalarTag.DIRECTIVE) and bool(doc.directive_table)


def check_missing_security_context(doc: ConfigDocument, ctx) -> Iterator[Diagnostic]:
    pod = pod_spec_path(doc)
    if pod is None or not doc.has_under(pod):
        return
    if _runs_as_non_root(doc, pod / "securityContext"):
        return
    containers = _container_paths(doc, pod, ("containers",))
    if containers and all(_runs_as_non_root(doc, c / "securityContext") for c in containers):
        return
    target = pod / "securityContext"
    anchor = next(doc.under(target), None) or doc.get(target) or next(doc.under(pod))
    yield Diagnostic(
        rule_id="MISSING_SECURITY_CONTEXT",
        category=CONTEXT,
        location=anchor.span,
        key_path=target,
        message="pod securityContext sets neither runAsUser nor runAsNonRoot; containers may run as root",
        fix_pattern=FixPattern.PM,
        fix_hint="securityContext: {runAsNonRoot: true, runAsUser: 65534}",
        severity=Severity.WARNING,
    )


def _probe_present(doc: ConfigDocument, path: KeyPath) -> bool:
    return doc.get(path) is not None or doc.has_under(path)


def check_missing_liveness_probe(doc: ConfigDocument, ctx) -> Iterator[Diagnostic]:
    pod = pod_spec_path(doc)
    if pod is None:
        return
    for container in _container_paths(doc, pod, ("containers",)):
        probe = container / "livenessProbe"
        if _probe_present(doc, probe):
            continue
        anchor: Optional[Leaf] = doc.get(container / "name") or next(doc.under(container))
        name = plain_text(doc.get(container / "name"))
        label = f"container '{name}'" if name else f"container #{container.segments[-1]}"
        yield Diagnostic(
            rule_id="MISSING_LIVENESS_PROBE",
            category=PROBING,
            location=anchor.span,
            key_path=probe,
            message=f"{label} has no livenessProbe; a hung process will never be restarted",
            severity=Severity.WARNING,
        )
