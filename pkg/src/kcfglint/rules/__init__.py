from .catalog import default_registry
from .engine import (
    DEFAULT_HELMING_KEYS,
    ConfigError,
    DeprecatedApi,
    Rule,
    RuleConfig,
    RuleContext,
    RuleFailure,
    RuleRegistry,
    load_rule_config,
    run_rules,
)
from .graph import ReferenceGraph, build_reference_graph
from .helming import is_hard_coded, is_template, resolve_directive

__all__ = [
    "DEFAULT_HELMING_KEYS",
    "ConfigError",
    "DeprecatedApi",
    "ReferenceGraph",
    "Rule",
    "RuleConfig",
    "RuleContext",
    "RuleFailure",
    "RuleRegistry",
    "build_reference_graph",
    "default_registry",
    "is_hard_coded",
    "is_template",
    "load_rule_config",
    "resolve_directive",
    "run_rules",
]
