"""Independent reference implementations used as test oracles.

These work on plain Python data from a YAML loader rather than on the
package's flattened documents, so agreement is evidence, not tautology.
"""

from __future__ import annotations

import itertools
import re
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

import yaml

PLACEHOLDER = "⟦"
ALLOWLIST = {"image", "mountPath", "namespace", "tag", "repository", "storageClassName", "host"}
POD_PATHS = {
    "Pod": ["spec"],
    "Deployment": ["spec", "template", "spec"],
    "StatefulSet": ["spec", "template", "spec"],
    "DaemonSet": ["spec", "template", "spec"],
    "Job": ["spec", "template", "spec"],
    "ReplicaSet": ["spec", "template", "spec"],
    "CronJob": ["spec", "jobTemplate", "spec", "template", "spec"],
}
TRACKED = {"ServiceAccount", "ClusterRole", "StorageClass", "PersistentVolumeClaim", "PersistentVolume", "Role"}
CLUSTER = {"ClusterRole", "StorageClass", "PersistentVolume"}
BUILTIN = {("ServiceAccount", "default"), ("ClusterRole", "cluster-admin"), ("ClusterRole", "admin"),
           ("ClusterRole", "edit"), ("ClusterRole", "view")}


# --------------------------------------------------------------- flattening

def render(path: Iterable) -> str:
    out = ""
    for seg in path:
        if isinstance(seg, int):
            out += f"[{seg}]"
        else:
            out += ("." if out else "") + seg
    return out


def flatten(data, prefix=()) -> dict[str, object]:
    """Scalar leaves of nested dicts/lists keyed by rendered path."""
    out: dict[str, object] = {}
    if isinstance(data, dict):
        for k, v in data.items():
            out.update(flatten(v, prefix + (str(k),)))
    elif isinstance(data, list):
        for i, v in enumerate(data):
            out.update(flatten(v, prefix + (i,)))
    else:
        out[render(prefix)] = data
    return out


def ruamel_documents(text: str) -> list[dict[str, object]]:
    from ruamel.yaml import YAML

    loader = YAML(typ="safe", pure=True)
    loader.version = (1, 1)
    return [flatten(d) for d in loader.load_all(text) if d is not None]


def pyyaml_documents(text: str) -> list:
    return [d for d in yaml.safe_load_all(text) if d is not None]


# ---------------------------------------------------------------- corpus

def masked(text: str) -> str:
    from kcfglint.parser import mask_directives

    return mask_directives(text)[0]


def chart_roots(root: Path) -> list[Path]:
    out = []
    for p in sorted(root.rglob("*")):
        if p.is_dir() and ((p / "Chart.yaml").exists() or ((p / "values.yaml").exists() and (p / "templates").is_dir())):
            out.append(p)
    return out


def load_tree(root: Path):
    """[(relative file, doc, is_template)] for every parseable YAML document, plus unparseable files."""
    root = Path(root)
    charts = chart_roots(root)
    docs, broken = [], []
    for f in sorted(root.rglob("*")):
        if f.suffix not in (".yaml", ".yml") or not f.is_file():
            continue
        rel = f.relative_to(root).as_posix()
        text = f.read_text()
        owner = next((c for c in charts if c in f.parents), None)
        if owner is not None and f.parent == owner and f.name in ("values.yaml", "values.yml"):
            continue
        in_templates = owner is not None and (owner / "templates") in f.parents
        try:
            loaded = pyyaml_documents(masked(text))
        except yaml.YAMLError:
            broken.append(rel)
            continue
        for d in loaded:
            docs.append((rel, d, in_templates or "{{" in text))
    return docs, broken


def _get(d, path):
    for seg in path:
        if isinstance(d, dict) and seg in d:
            d = d[seg]
        elif isinstance(d, list) and isinstance(seg, int) and seg < len(d):
            d = d[seg]
        else:
            return None
    return d


def _plain(v) -> Optional[str]:
    if v is None or isinstance(v, (dict, list)):
        return None
    s = str(v) if not isinstance(v, bool) else ("true" if v else "false")
    if PLACEHOLDER in s or s == "":
        return None
    return s


# ------------------------------------------------------------ per-rule scans

def scan_helming(docs):
    out = set()
    for file, d, is_tpl in docs:
        if not is_tpl:
            continue
        for path, v in flatten(d).items():
            key = re.sub(r"(\[\d+\])+$", "", path).split(".")[-1]
            if key in ALLOWLIST and v is not None and PLACEHOLDER not in str(v):
                out.add(("INCORRECT_HELMING", file, path))
    return out


def _deprecated_table():
    text = resources.files("kcfglint").joinpath("data/deprecated_apis.yaml").read_text()
    table = {}
    for e in yaml.safe_load(text):
        for k in e["kinds"]:
            table[(e["apiVersion"], k)] = e["replacement"]
    return table


def scan_version(docs):
    table = _deprecated_table()
    return {("VERSION_INCOMPAT", f, "apiVersion") for f, d, _ in docs
            if isinstance(d, dict) and (d.get("apiVersion"), d.get("kind")) in table}


def scan_names(docs):
    out = set()
    for f, d, _ in docs:
        for path, v in flatten(d).items():
            if re.search(r"(^|\.)metadata\.(name|generateName)$", path) and v is not None:
                literal = re.sub(r"⟦D\d+⟧", "", str(v))
                if len(literal) > 63:
                    out.add(("NAME_TOO_LONG", f, path))
    return out


def _pods(d):
    if not isinstance(d, dict):
        return None
    segs = POD_PATHS.get(d.get("kind"))
    if not segs:
        return None
    pod = _get(d, segs)
    return (segs, pod) if isinstance(pod, dict) else (segs, None)


def scan_ports(docs):
    out = set()
    for f, d, _ in docs:
        found = _pods(d)
        if not found or found[1] is None:
            continue
        segs, pod = found
        for ckey in ("containers", "initContainers"):
            for i, c in enumerate(pod.get(ckey) or []):
                base = segs + [ckey, i]
                for j, p in enumerate(c.get("ports") or []):
                    port = p.get("containerPort")
                    if isinstance(port, int) and not isinstance(port, bool) and 0 < port < 1024:
                        out.add(("PRIVILEGED_PORT", f, render(base + ["ports", j, "containerPort"])))
                for akey in ("args", "command"):
                    for j, a in enumerate(c.get(akey) or []):
                        m = re.search(r"--secure-port=(\d+)\b", a) if isinstance(a, str) else None
                        if m and int(m.group(1)) < 1024:
                            out.add(("PRIVILEGED_PORT", f, render(base + [akey, j])))
    return out


def scan_rbac(docs):
    out = set()
    for f, d, _ in docs:
        if not isinstance(d, dict) or d.get("kind") not in ("Role", "ClusterRole"):
            continue
        for i, rule in enumerate(d.get("rules") or []):
            for field in ("apiGroups", "resources", "verbs"):
                for j, v in enumerate(rule.get(field) or []):
                    if v == "*":
                        out.add(("WILDCARD_RBAC", f, f"rules[{i}].{field}[{j}]"))
    return out


def _non_root(sc, has_directives: bool) -> bool:
    if sc is None or (isinstance(sc, str) and PLACEHOLDER in sc):
        return has_directives
    if not isinstance(sc, dict):
        return False
    user = sc.get("runAsUser", None)
    if "runAsUser" in sc and user is not None and (PLACEHOLDER in str(user) or str(user) != "0"):
        return True
    nr = sc.get("runAsNonRoot")
    return nr is True or (isinstance(nr, str) and PLACEHOLDER in nr)


def scan_security_context(docs, texts):
    out = set()
    for f, d, _ in docs:
        found = _pods(d)
        if not found or not found[1]:
            continue
        segs, pod = found
        directives = "{{" in texts[f]
        if "securityContext" in pod and _non_root(pod["securityContext"], directives):
            continue
        containers = pod.get("containers") or []
        if containers and all(isinstance(c, dict) and "securityContext" in c and _non_root(c["securityContext"], directives)
                              for c in containers):
            continue
        out.add(("MISSING_SECURITY_CONTEXT", f, render(segs + ["securityContext"])))
    return out


def scan_liveness(docs):
    out = set()
    for f, d, _ in docs:
        found = _pods(d)
        if not found or found[1] is None:
            continue
        segs, pod = found
        for i, c in enumerate(pod.get("containers") or []):
            if "livenessProbe" not in c or c["livenessProbe"] == {}:
                out.add(("MISSING_LIVENESS_PROBE", f, render(segs + ["containers", i, "livenessProbe"])))
    return out


def _ns(d):
    return _plain(_get(d, ["metadata", "namespace"]))


def graph(docs):
    """(declarations, references) as plain tuples, by brute force over the edge catalog."""
    decls, refs = [], []
    for f, d, _ in docs:
        if not isinstance(d, dict):
            continue
        kind = d.get("kind")
        ns = _ns(d)
        name = _plain(_get(d, ["metadata", "name"]))
        if kind in TRACKED and name:
            decls.append((kind, name, None if kind in CLUSTER else ns, f, "metadata.name"))
        if kind in ("RoleBinding", "ClusterRoleBinding"):
            for i, s in enumerate(d.get("subjects") or []):
                if isinstance(s, dict) and s.get("kind") == "ServiceAccount" and _plain(s.get("name")):
                    sns = _plain(s.get("namespace")) if "namespace" in s else ns
                    refs.append(("ServiceAccount", _plain(s["name"]), sns, f, f"subjects[{i}].name"))
            rr = d.get("roleRef") or {}
            if rr.get("kind") in ("Role", "ClusterRole") and _plain(rr.get("name")):
                refs.append((rr["kind"], _plain(rr["name"]), None if rr["kind"] in CLUSTER else ns, f, "roleRef.name"))
        found = _pods(d)
        if found and found[1]:
            segs, pod = found
            for key in ("serviceAccountName", "serviceAccount"):
                if _plain(pod.get(key)):
                    refs.append(("ServiceAccount", _plain(pod[key]), ns, f, render(segs + [key])))
            for i, v in enumerate(pod.get("volumes") or []):
                claim = _plain(_get(v, ["persistentVolumeClaim", "claimName"]))
                if claim:
                    refs.append(("PersistentVolumeClaim", claim, ns, f, render(segs + ["volumes", i, "persistentVolumeClaim", "claimName"])))
        if kind in ("PersistentVolumeClaim", "PersistentVolume") and _plain(_get(d, ["spec", "storageClassName"])):
            refs.append(("StorageClass", _plain(d["spec"]["storageClassName"]), None, f, "spec.storageClassName"))
        if kind == "PersistentVolumeClaim" and _plain(_get(d, ["spec", "volumeName"])):
            refs.append(("PersistentVolume", _plain(d["spec"]["volumeName"]), None, f, "spec.volumeName"))
    return decls, refs


def _matches(ref, decl) -> bool:
    if ref[0] != decl[0] or ref[1] != decl[1]:
        return False
    if ref[0] in CLUSTER:
        return True
    return ref[2] is None or decl[2] is None or ref[2] == decl[2]


def _builtin(kind, name) -> bool:
    return (kind, name) in BUILTIN or (kind == "ClusterRole" and name.startswith("system:"))


def scan_orphanism(docs):
    decls, refs = graph(docs)
    out = set()
    for decl in decls:
        if not any(_matches(r, decl) for r in refs):
            out.add(("ORPHANISM", decl[3], decl[4]))
    for ref in refs:
        if not _builtin(ref[0], ref[1]) and not any(_matches(ref, decl) for decl in decls):
            out.add(("ORPHANISM", ref[3], ref[4]))
    return out


def scan_all(root: Path) -> set[tuple[str, str, str]]:
    root = Path(root)
    docs, broken = load_tree(root)
    texts = {f.relative_to(root).as_posix(): f.read_text() for f in root.rglob("*.yaml")}
    found = set()
    found |= scan_helming(docs)
    found |= scan_version(docs)
    found |= scan_names(docs)
    found |= scan_ports(docs)
    found |= scan_rbac(docs)
    found |= scan_security_context(docs, texts)
    found |= scan_liveness(docs)
    found |= scan_orphanism(docs)
    found |= {("SYNTAX", f, "") for f in broken}
    return found


# ---------------------------------------------------------------- matching

def exhaustive_max_matching(edges: set[tuple[int, int]], n_alerts: int, n_defects: int) -> int:
    """Size of the largest one-to-one matching, by trying every injective assignment."""
    best = 0
    alerts = range(n_alerts)
    for k in range(min(n_alerts, n_defects), 0, -1):
        for chosen in itertools.combinations(alerts, k):
            for targets in itertools.permutations(range(n_defects), k):
                if all((a, t) in edges for a, t in zip(chosen, targets)):
                    return k
    return best
