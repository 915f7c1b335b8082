"""Static checks for Kubernetes manifests and Helm charts."""

__version__ = "0.1.0"

from .corpus import Corpus, build_corpus
from .evaluation import EvalReport, load_alerts, load_dataset, score
from .model import ConfigDocument, Diagnostic, KeyPath, ScalarTag, ScalarValue, ScriptKind, Severity, SourceSpan
from .parser import HelmChart, export_flat, import_flat, load_chart, mask_directives, parse_script
from .report import Report, emit, exit_code
from .rules import RuleConfig, default_registry, load_rule_config, run_rules
from .taxonomy import Category, Consequence, DefectCategory, FixPattern, SubCategory

__all__ = [
    "Category",
    "ConfigDocument",
    "Consequence",
    "Corpus",
    "DefectCategory",
    "Diagnostic",
    "EvalReport",
    "FixPattern",
    "HelmChart",
    "KeyPath",
    "Report",
    "RuleConfig",
    "ScalarTag",
    "ScalarValue",
    "ScriptKind",
    "Severity",
    "SourceSpan",
    "SubCategory",
    "build_corpus",
    "default_registry",
    "emit",
    "exit_code",
    "export_flat",
    "import_flat",
    "load_alerts",
    "load_chart",
    "load_dataset",
    "load_rule_config",
    "mask_directives",
    "parse_script",
    "run_rules",
    "score",
]
