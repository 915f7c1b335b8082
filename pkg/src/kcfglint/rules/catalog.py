"""The built-in rule set."""

from __future__ import annotations

from ..model import Severity
from . import pack
from .engine import Rule, RuleRegistry
from .helming import CATEGORY as HELMING, check_incorrect_helming
from .orphanism import CATEGORY as ORPHANISM, check_orphanism


def default_registry() -> RuleRegistry:
    return RuleRegistry(
        [
            Rule(
                "INCORRECT_HELMING",
                HELMING,
                "Configuration value hard-coded in a Helm template instead of read from values",
                check_incorrect_helming,
            ),
            Rule(
                "ORPHANISM",
                ORPHANISM,
                "Resource declared but never referenced, or reference to a resource that is not declared",
                check_orphanism,
                per_document=False,
                severity=Severity.ERROR,
            ),
            Rule(
                "VERSION_INCOMPAT",
                pack.VERSION,
                "apiVersion no longer served for this kind",
                pack.check_version_incompat,
                severity=Severity.ERROR,
            ),
            Rule(
                "NAME_TOO_LONG",
                pack.NAME_VR,
                f"Object name longer than {pack.MAX_NAME_LENGTH} characters",
                pack.check_name_too_long,
                severity=Severity.ERROR,
            ),
            Rule(
                "SYNTAX",
                pack.SYNTAX,
                "File is not valid YAML, or a mapping repeats a key",
                pack.check_syntax,
                per_document=False,
                severity=Severity.ERROR,
            ),
            Rule(
                "PRIVILEGED_PORT",
                pack.PORT,
                f"Container binds a port below {pack.PRIVILEGED_PORT_LIMIT}",
                pack.check_privileged_port,
            ),
            Rule(
                "WILDCARD_RBAC",
                pack.ACCESS,
                "Role or ClusterRole rule uses '*' in apiGroups, resources or verbs",
                pack.check_wildcard_rbac,
            ),
            Rule(
                "MISSING_SECURITY_CONTEXT",
                pack.CONTEXT,
                "Pod spec sets neither runAsUser nor runAsNonRoot",
                pack.check_missing_security_context,
            ),
            Rule(
                "MISSING_LIVENESS_PROBE",
                pack.PROBING,
                "Container has no livenessProbe",
                pack.check_missing_liveness_probe,
            ),
        ]
    )
