"""Rule registry, rule configuration and the evaluation driver."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

import yaml

from ..model import ConfigDocument, Diagnostic, ScriptKind, Severity, sort_diagnostics
from ..taxonomy import DefectCategory

log = logging.getLogger(__name__)

DEFAULT_HELMING_KEYS = frozenset(
    {"image", "mountPath", "namespace", "tag", "repository", "storageClassName", "host"}
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DeprecatedApi:
    api_version: str
    kinds: frozenset[str]
    replacement: str


def _parse_deprecated(entries, source: str) -> tuple[DeprecatedApi, ...]:
    out = []
    if not isinstance(entries, list):
        raise ConfigError(f"{source}: deprecated_apis must be a list")
    for i, item in enumerate(entries):
        try:
            kinds = item.get("kinds") or [item["kind"]]
            out.append(DeprecatedApi(str(item["apiVersion"]), frozenset(map(str, kinds)), str(item["replacement"])))
        except (KeyError, TypeError, AttributeError) as exc:
            raise ConfigError(f"{source}: deprecated_apis entry {i} is malformed") from exc
    return tuple(out)


def default_deprecated_apis() -> tuple[DeprecatedApi, ...]:
    text = resources.files("kcfglint").joinpath("data/deprecated_apis.yaml").read_text(encoding="utf-8")
    return _parse_deprecated(yaml.safe_load(text), "deprecated_apis.yaml")


@dataclass(frozen=True)
class RuleConfig:
    enabled: Mapping[str, bool] = field(default_factory=dict)
    severities: Mapping[str, Severity] = field(default_factory=dict)
    helming_keys: frozenset[str] = DEFAULT_HELMING_KEYS
    deprecated_apis: tuple[DeprecatedApi, ...] = field(default_factory=default_deprecated_apis)

    def deprecated_replacement(self, api_version: str, kind: str) -> Optional[str]:
        # later entries (user additions) win
        for entry in reversed(self.deprecated_apis):
            if entry.api_version == api_version and (kind in entry.kinds or "*" in entry.kinds):
                return entry.replacement
        return None


def load_rule_config(path, known_rules: Optional[Iterable[str]] = None) -> RuleConfig:
    """Read a rules file.

    Example::

        rules:
          MISSING_LIVENESS_PROBE: {enabled: false}
          PRIVILEGED_PORT: {severity: error}
        helming_keys: [hostPath]          # added to the default key set
        deprecated_apis:                  # added to the shipped table
          - {apiVersion: apps/v1beta1, kinds: [ReplicaSet], replacement: apps/v1}
    """
    source = str(path)
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: expected a mapping at top level")
    unknown = set(data) - {"rules", "helming_keys", "deprecated_apis"}
    if unknown:
        raise ConfigError(f"{source}: unknown settings {sorted(unknown)}")
    known = set(known_rules) if known_rules is not None else None
    enabled: dict[str, bool] = {}
    severities: dict[str, Severity] = {}
    for rule_id, opts in (data.get("rules") or {}).items():
        if known is not None and rule_id not in known:
            raise ConfigError(f"{source}: unknown rule {rule_id!r}")
        if opts is None:
            continue
        if not isinstance(opts, dict):
            raise ConfigError(f"{source}: options for {rule_id} must be a mapping")
        if "enabled" in opts:
            enabled[rule_id] = bool(opts["enabled"])
        if "severity" in opts:
            try:
                severities[rule_id] = Severity(str(opts["severity"]).lower())
            except ValueError as exc:
                raise ConfigError(f"{source}: bad severity for {rule_id}: {opts['severity']!r}") from exc
    keys = data.get("helming_keys") or []
    if not isinstance(keys, list):
        raise ConfigError(f"{source}: helming_keys must be a list")
    extra = _parse_deprecated(data.get("deprecated_apis") or [], source)
    return RuleConfig(
        enabled=enabled,
        severities=severities,
        helming_keys=DEFAULT_HELMING_KEYS | frozenset(map(str, keys)),
        deprecated_apis=default_deprecated_apis() + extra,
    )


DocumentCheck = Callable[[ConfigDocument, "RuleContext"], Iterable[Diagnostic]]
CorpusCheck = Callable[["RuleContext"], Iterable[Diagnostic]]


@dataclass(frozen=True)
class Rule:
    id: str
    category: DefectCategory
    description: str
    check: Callable
    per_document: bool = True
    enabled_by_default: bool = True
    severity: Severity = Severity.WARNING


class RuleRegistry:
    def __init__(self, rules: Iterable[Rule] = ()):
        self._rules: dict[str, Rule] = {}
        for rule in rules:
            self.register(rule)

    def register(self, rule: Rule) -> Rule:
        if rule.id in self._rules:
            raise ValueError(f"duplicate rule id {rule.id}")
        self._rules[rule.id] = rule
        return rule

    def __iter__(self):
        return iter(self._rules.values())

    def __len__(self) -> int:
        return len(self._rules)

    def __contains__(self, rule_id: str) -> bool:
        return rule_id in self._rules

    def __getitem__(self, rule_id: str) -> Rule:
        return self._rules[rule_id]

    def ids(self) -> list[str]:
        return list(self._rules)

    def enabled(self, config: RuleConfig) -> list[Rule]:
        return [r for r in self if config.enabled.get(r.id, r.enabled_by_default)]

    def descriptions(self) -> dict[str, str]:
        return {r.id: r.description for r in self}


@dataclass
class RuleContext:
    corpus: "Corpus"  # noqa: F821
    config: RuleConfig


@dataclass(frozen=True)
class RuleFailure:
    rule_id: str
    file: Optional[str]
    error: str


def _applies(doc: ConfigDocument) -> bool:
    return doc.script_kind is not ScriptKind.HELM_VALUES


def run_rules(
    corpus,
    registry: Optional[RuleRegistry] = None,
    config: Optional[RuleConfig] = None,
    workers: int = 1,
    errors: Optional[list] = None,
) -> list[Diagnostic]:
    """Evaluate every enabled rule over ``corpus``.

    Output is deduplicated on (rule id, file, key path) and sorted by file,
    line and rule id. A rule that raises is skipped for that input and the
    failure is appended to ``errors`` when given.
    """
    if registry is None:
        from .catalog import default_registry

        registry = default_registry()
    if config is None:
        config = RuleConfig()
    if not len(registry):
        raise ValueError("rule registry is empty")
    ctx = RuleContext(corpus, config)
    rules = registry.enabled(config)
    doc_rules = [r for r in rules if r.per_document]
    corpus_rules = [r for r in rules if not r.per_document]
    failures: list[RuleFailure] = []

    def per_doc(doc: ConfigDocument) -> list[Diagnostic]:
        out: list[Diagnostic] = []
        if not _applies(doc):
            return out
        for rule in doc_rules:
            try:
                out.extend(rule.check(doc, ctx))
            except Exception as exc:  # contained: one bad rule must not sink the scan
                log.exception("rule %s failed on %s", rule.id, doc.file)
                failures.append(RuleFailure(rule.id, doc.file, f"{type(exc).__name__}: {exc}"))
        return out

    found: list[Diagnostic] = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(per_doc, corpus.documents):
                found.extend(chunk)
    else:
        for doc in corpus.documents:
            found.extend(per_doc(doc))
    for rule in corpus_rules:
        try:
            found.extend(rule.check(ctx))
        except Exception as exc:
            log.exception("rule %s failed", rule.id)
            failures.append(RuleFailure(rule.id, None, f"{type(exc).__name__}: {exc}"))

    if config.severities:
        found = [
            replace(d, severity=config.severities[d.rule_id]) if d.rule_id in config.severities else d
            for d in found
        ]
    out = []
    seen = set()
    for diag in sort_diagnostics(found):
        key = (diag.rule_id, diag.file, str(diag.key_path))
        if key not in seen:
            seen.add(key)
            out.append(diag)
    if errors is not None:
        errors.extend(sorted(failures, key=lambda f: (f.rule_id, f.file or "")))
    return out
