"""Cross-document declarations and references between tracked Kubernetes kinds."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from ..model import ConfigDocument, KeyPath, Leaf, ScalarTag, ScriptKind, SourceSpan

TRACKED_KINDS = ("ServiceAccount", "ClusterRole", "StorageClass", "PersistentVolumeClaim", "PersistentVolume", "Role")
NAMESPACED_KINDS = frozenset({"ServiceAccount", "Role", "PersistentVolumeClaim"})
CLUSTER_KINDS = frozenset({"ClusterRole", "StorageClass", "PersistentVolume"})

BINDING_KINDS = frozenset({"RoleBinding", "ClusterRoleBinding"})

# Objects every cluster provides without a manifest.
BUILTIN_NAMES = {
    "ServiceAccount": frozenset({"default"}),
    "ClusterRole": frozenset({"cluster-admin", "admin", "edit", "view"}),
}
BUILTIN_PREFIXES = {"ClusterRole": ("system:",)}

POD_SPEC_PATHS = {
    "Pod": ("spec",),
    "Deployment": ("spec", "template", "spec"),
    "StatefulSet": ("spec", "template", "spec"),
    "DaemonSet": ("spec", "template", "spec"),
    "Job": ("spec", "template", "spec"),
    "ReplicaSet": ("spec", "template", "spec"),
    "CronJob": ("spec", "jobTemplate", "spec", "template", "spec"),
}


def pod_spec_path(doc: ConfigDocument) -> Optional[KeyPath]:
    segs = POD_SPEC_PATHS.get(doc.kind or "")
    return KeyPath(segs) if segs else None


def is_builtin(kind: str, name: str) -> bool:
    if name in BUILTIN_NAMES.get(kind, ()):
        return True
    return any(name.startswith(p) for p in BUILTIN_PREFIXES.get(kind, ()))


def plain_text(leaf: Optional[Leaf]) -> Optional[str]:
    """Text of a leaf usable as a graph name: present, non-null, non-empty, not templated."""
    if leaf is None or leaf.value.tag in (ScalarTag.NULL, ScalarTag.DIRECTIVE):
        return None
    return leaf.value.raw_text or None


def doc_namespace(doc: ConfigDocument) -> Optional[str]:
    return plain_text(doc.get("metadata.namespace"))


@dataclass(frozen=True)
class NodeKey:
    kind: str
    name: str
    # None: namespace not stated (matches any); "" for cluster-scoped kinds
    namespace: Optional[str]

    def __str__(self) -> str:
        if self.namespace:
            return f"{self.kind}/{self.namespace}/{self.name}"
        return f"{self.kind}/{self.name}"


def node_key(kind: str, name: str, namespace: Optional[str]) -> NodeKey:
    return NodeKey(kind, name, "" if kind in CLUSTER_KINDS else namespace)


@dataclass(frozen=True)
class Declaration:
    key: NodeKey
    file: str
    doc_index: int
    key_path: KeyPath
    span: SourceSpan


@dataclass(frozen=True)
class Reference:
    target: NodeKey
    file: str
    doc_index: int
    key_path: KeyPath
    span: SourceSpan
    edge: str  # catalog letter a-f


@dataclass
class ReferenceGraph:
    declarations: dict[NodeKey, list[Declaration]] = field(default_factory=dict)
    references: list[Reference] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._by_kind_name: dict[tuple[str, str], list[Declaration]] = defaultdict(list)
        for decls in self.declarations.values():
            for d in decls:
                self._by_kind_name[(d.key.kind, d.key.name)].append(d)
        self._refs_by_kind_name: dict[tuple[str, str], list[Reference]] = defaultdict(list)
        for ref in self.references:
            self._refs_by_kind_name[(ref.target.kind, ref.target.name)].append(ref)

    def all_declarations(self) -> Iterator[Declaration]:
        for key in sorted(self.declarations, key=str):
            yield from self.declarations[key]

    def resolve(self, target: NodeKey) -> list[Declaration]:
        """Declarations satisfying a reference (unstated namespaces match any)."""
        found = []
        for d in self._by_kind_name.get((target.kind, target.name), ()):
            if target.kind in CLUSTER_KINDS:
                found.append(d)
            elif target.namespace is None or d.key.namespace is None or target.namespace == d.key.namespace:
                found.append(d)
        return found

    def exists(self, target: NodeKey) -> bool:
        return is_builtin(target.kind, target.name) or bool(self.resolve(target))

    def inbound(self, decl: Declaration) -> list[Reference]:
        out = []
        for ref in self._refs_by_kind_name.get((decl.key.kind, decl.key.name), ()):
            if decl.key.kind in CLUSTER_KINDS:
                out.append(ref)
            elif ref.target.namespace is None or decl.key.namespace is None or ref.target.namespace == decl.key.namespace:
                out.append(ref)
        return out


def _declaration(doc: ConfigDocument) -> Optional[Declaration]:
    kind = plain_text(doc.get("kind"))
    if kind not in TRACKED_KINDS:
        return None
    leaf = doc.get("metadata.name")
    name = plain_text(leaf)
    if name is None:
        return None
    return Declaration(node_key(kind, name, doc_namespace(doc)), doc.file, doc.doc_index, leaf.path, leaf.span)


def _ref(doc: ConfigDocument, leaf: Optional[Leaf], kind: str, namespace: Optional[str], edge: str) -> Optional[Reference]:
    name = plain_text(leaf)
    if name is None:
        return None
    return Reference(node_key(kind, name, namespace), doc.file, doc.doc_index, leaf.path, leaf.span, edge)


def _list_indices(doc: ConfigDocument, prefix: KeyPath) -> list[int]:
    seen = []
    n = len(prefix)
    for leaf in doc.under(prefix):
        seg = leaf.path.segments[n]
        if isinstance(seg, int) and seg not in seen:
            seen.append(seg)
    return seen


def document_references(doc: ConfigDocument) -> list[Reference]:
    kind = plain_text(doc.get("kind"))
    if kind is None:
        return []
    ns = doc_namespace(doc)
    refs: list[Optional[Reference]] = []
    if kind in BINDING_KINDS:
        subjects = KeyPath(("subjects",))
        for i in _list_indices(doc, subjects):
            item = subjects / i
            if plain_text(doc.get(item / "kind")) == "ServiceAccount":
                sub_ns_leaf = doc.get(item / "namespace")
                sub_ns = plain_text(sub_ns_leaf)
                if sub_ns is None and sub_ns_leaf is None:
                    sub_ns = ns
                refs.append(_ref(doc, doc.get(item / "name"), "ServiceAccount", sub_ns, "a"))
        ref_kind = plain_text(doc.get("roleRef.kind"))
        if ref_kind in ("Role", "ClusterRole"):
            refs.append(_ref(doc, doc.get("roleRef.name"), ref_kind, ns, "b"))
    pod = pod_spec_path(doc)
    if pod is not None:
        for key in ("serviceAccountName", "serviceAccount"):
            refs.append(_ref(doc, doc.get(pod / key), "ServiceAccount", ns, "c"))
        volumes = pod / "volumes"
        for i in _list_indices(doc, volumes):
            refs.append(
                _ref(doc, doc.get(volumes / i / "persistentVolumeClaim" / "claimName"), "PersistentVolumeClaim", ns, "e")
            )
    if kind in ("PersistentVolumeClaim", "PersistentVolume"):
        refs.append(_ref(doc, doc.get("spec.storageClassName"), "StorageClass", None, "d"))
    if kind == "PersistentVolumeClaim":
        refs.append(_ref(doc, doc.get("spec.volumeName"), "PersistentVolume", None, "f"))
    return [r for r in refs if r is not None]


def build_reference_graph(documents: Iterable[ConfigDocument]) -> ReferenceGraph:
    declarations: dict[NodeKey, list[Declaration]] = defaultdict(list)
    references: list[Reference] = []
    for doc in documents:
        if doc.script_kind is ScriptKind.HELM_VALUES:
            continue
        decl = _declaration(doc)
        if decl is not None:
            declarations[decl.key].append(decl)
        references.extend(document_references(doc))
    return ReferenceGraph(dict(declarations), references)
