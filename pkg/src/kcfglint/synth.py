"""Deterministic synthetic corpus with seeded defects, for accuracy and throughput checks.

Each part holds 200 scripts: 10 charts (``values.yaml`` plus 9 templates) and
100 plain manifests. Per part the labels are 20 incorrect-Helming defects (17
on keys the rule watches, 3 on keys it does not) and 10 orphanism defects (5
dangling references, 5 unreferenced declarations). Unlabeled extras that the
rules do flag: 3 hard-coded namespaces in chart ConfigMaps and 2 bindings to
ClusterRoles installed outside the corpus. Decoys that must stay silent: 10
partially templated images and 10 placeholder-named service accounts.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path
from string import Template
from typing import Optional

from .evaluation import LabeledDefect
from .model import KeyPath
from .taxonomy import Category, DefectCategory

SCRIPTS_PER_PART = 200
CHARTS = 10

HELMING = DefectCategory(Category.INCORRECT_HELMING)
ORPHANISM = DefectCategory(Category.ORPHANISM)

# (chart, injection): which template gets which hard-coded value
HELMING_INJECTIONS = (
    ("image", "mountPath"),
    ("image", "host"),
    ("image", "namespace"),
    ("image", "replicas"),
    ("image", "mountPath"),
    ("image", "serviceType"),
    ("image", "mountPath"),
    ("image", "host"),
    ("mountPath", "namespace"),
    ("mountPath", "replicas"),
)
FP_CONFIGMAP_CHARTS = (0, 3, 6)
POD = "spec.template.spec"

_VALUES = Template("""\
replicaCount: 1
image:
  repository: registry.example.com/app$c
  tag: "$tag"
dataDir: /var/lib/app$c
logLevel: info
podSecurity:
  runAsUser: 10001
service:
  type: ClusterIP
ingress:
  host: app$c.example.com
serviceAccount:
  create: true
""")

_HELPERS = Template("""\
{{- define "app$c.fullname" -}}
{{ .Release.Name }}-app$c
{{- end -}}
""")

_TPL_DEPLOYMENT = Template("""\
apiVersion: apps/v1
kind: Deployment
metadata:
  name: {{ include "app$c.fullname" . }}-w$t
  namespace: $namespace
  labels:
    app: app$c
spec:
  replicas: $replicas
  selector:
    matchLabels:
      app: app$c-w$t
  template:
    metadata:
      labels:
        app: app$c-w$t
    spec:
$sa      securityContext:
        runAsNonRoot: true
        runAsUser: {{ .Values.podSecurity.runAsUser }}
      containers:
        - name: worker$t
          image: $image
          ports:
            - containerPort: 8080
          volumeMounts:
            - name: data
              mountPath: $mount
          livenessProbe:
            httpGet:
              path: /healthz
              port: 8080
      volumes:
        - name: data
          emptyDir: {}
""")

_TPL_SERVICE_ACCOUNT = Template("""\
apiVersion: v1
kind: ServiceAccount
metadata:
  name: {{ include "app$c.fullname" . }}
  namespace: {{ .Release.Namespace }}
""")

_TPL_SERVICE = Template("""\
apiVersion: v1
kind: Service
metadata:
  name: {{ include "app$c.fullname" . }}
  namespace: {{ .Release.Namespace }}
spec:
  type: $type
  selector:
    app: app$c-w0
  ports:
    - name: http
      port: 80
      targetPort: 8080
""")

_TPL_CONFIGMAP = Template("""\
apiVersion: v1
kind: ConfigMap
metadata:
  name: {{ include "app$c.fullname" . }}-config
  namespace: $namespace
data:
  LOG_LEVEL: {{ .Values.logLevel | quote }}
""")

_TPL_INGRESS = Template("""\
apiVersion: networking.k8s.io/v1
kind: Ingress
metadata:
  name: {{ include "app$c.fullname" . }}
  namespace: {{ .Release.Namespace }}
spec:
  rules:
    - host: $host
      http:
        paths:
          - path: /
            pathType: Prefix
            backend:
              service:
                name: {{ include "app$c.fullname" . }}
                port:
                  number: 80
""")

_DEPLOYMENT = Template("""\
apiVersion: apps/v1
kind: Deployment
metadata:
  name: $name
  namespace: $ns
spec:
  replicas: 2
  selector:
    matchLabels:
      app: $name
  template:
    metadata:
      labels:
        app: $name
    spec:
$extra_pod      securityContext:
        runAsNonRoot: true
        runAsUser: 10001
      containers:
        - name: main
          image: $image
          ports:
            - containerPort: 8080
          livenessProbe:
            httpGet:
              path: /healthz
              port: 8080
$volumes""")

_SERVICE_ACCOUNT = Template("""\
apiVersion: v1
kind: ServiceAccount
metadata:
  name: $name
  namespace: $ns
""")

_CLUSTER_ROLE = Template("""\
apiVersion: rbac.authorization.k8s.io/v1
kind: ClusterRole
metadata:
  name: $name
rules:
  - apiGroups:
      - ""
    resources:
      - pods
    verbs:
      - get
      - list
""")

_ROLE = Template("""\
apiVersion: rbac.authorization.k8s.io/v1
kind: Role
metadata:
  name: $name
  namespace: $ns
rules:
  - apiGroups:
      - ""
    resources:
      - configmaps
    verbs:
      - get
""")

_BINDING = Template("""\
apiVersion: rbac.authorization.k8s.io/v1
kind: $kind
metadata:
  name: $name
$ns_line
roleRef:
  apiGroup: rbac.authorization.k8s.io
  kind: $role_kind
  name: $role
subjects:
  - kind: ServiceAccount
    name: $sa
    namespace: $ns
""")

_STORAGE_CLASS = Template("""\
apiVersion: storage.k8s.io/v1
kind: StorageClass
metadata:
  name: $name
provisioner: ebs.csi.aws.com
""")

_PV = Template("""\
apiVersion: v1
kind: PersistentVolume
metadata:
  name: $name
spec:
$sc_line  capacity:
    storage: 10Gi
  accessModes:
    - ReadWriteOnce
  hostPath:
    path: /mnt/$name
""")

_PVC = Template("""\
apiVersion: v1
kind: PersistentVolumeClaim
metadata:
  name: $name
  namespace: $ns
spec:
  storageClassName: $sc
  volumeName: $pv
  accessModes:
    - ReadWriteOnce
  resources:
    requests:
      storage: 10Gi
""")

_CONFIGMAP = Template("""\
apiVersion: v1
kind: ConfigMap
metadata:
  name: $name
  namespace: $ns
data:
  mode: $mode
""")

_SERVICE = Template("""\
apiVersion: v1
kind: Service
metadata:
  name: $name
  namespace: $ns
spec:
  selector:
    app: $name
  ports:
    - port: 80
      targetPort: 8080
""")


@dataclass
class SynthCorpus:
    root: Path
    files: int
    defects: list[LabeledDefect]


class _Writer:
    def __init__(self, root: Path):
        self.root = root
        self.count = 0
        self.defects: list[LabeledDefect] = []

    def write(self, rel: str, text: str, scripts: bool = True) -> str:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        if scripts:
            self.count += 1
        return rel

    def label(self, file: str, category: DefectCategory, key_path: str, note: str) -> None:
        ident = f"S{len(self.defects) + 1:04d}"
        self.defects.append(LabeledDefect(ident, file, category, KeyPath.parse(key_path), None, note))


def _write_chart(w: _Writer, part: str, c: int, rng: random.Random) -> None:
    base = f"{part}/charts/app{c}"
    w.write(f"{base}/values.yaml", _VALUES.substitute(c=c, tag=f"1.{rng.randrange(20)}.{rng.randrange(10)}"))
    w.write(f"{base}/templates/_helpers.tpl", _HELPERS.substitute(c=c), scripts=False)
    first, second = HELMING_INJECTIONS[c]
    deployment_slots = {}
    slot = 0
    for inj in (first, second):
        if inj in ("image", "mountPath", "namespace", "replicas"):
            deployment_slots[slot] = inj
            slot += 1

    for t in range(6):
        inj = deployment_slots.get(t)
        fields = dict(
            c=c,
            t=t,
            namespace="{{ .Release.Namespace }}",
            replicas="{{ .Values.replicaCount }}",
            image='"{{ .Values.image.repository }}:{{ .Values.image.tag }}"',
            mount="{{ .Values.dataDir }}",
            sa="",
        )
        if t == 2:
            # decoy: partly templated, so not hard-coded
            fields["image"] = f'"registry.example.com/app{c}:{{{{ .Values.image.tag }}}}"'
        if t == 3 and c < 5:
            # decoy: reference to a placeholder-named account
            fields["sa"] = f'      serviceAccountName: {{{{ include "app{c}.fullname" . }}}}\n'
        if t == 4 and c >= 5:
            w.write(f"{base}/templates/serviceaccount.yaml", _TPL_SERVICE_ACCOUNT.substitute(c=c))
            continue
        file = f"{base}/templates/worker{t}.yaml"
        if inj == "image":
            fields["image"] = f"registry.example.com/app{c}:1.{rng.randrange(10)}.{t}"
            w.label(file, HELMING, f"{POD}.containers[0].image", "hard-coded image")
        elif inj == "mountPath":
            fields["mount"] = f"/var/lib/app{c}/worker{t}"
            w.label(file, HELMING, f"{POD}.containers[0].volumeMounts[0].mountPath", "hard-coded mountPath")
        elif inj == "namespace":
            fields["namespace"] = f"team-{c}"
            w.label(file, HELMING, "metadata.namespace", "hard-coded namespace")
        elif inj == "replicas":
            fields["replicas"] = "3"
            w.label(file, HELMING, "spec.replicas", "hard-coded replica count")
        w.write(file, _TPL_DEPLOYMENT.substitute(fields))

    service_type = "{{ .Values.service.type }}"
    if "serviceType" in (first, second):
        service_type = "LoadBalancer"
        w.label(f"{base}/templates/service.yaml", HELMING, "spec.type", "hard-coded service type")
    w.write(f"{base}/templates/service.yaml", _TPL_SERVICE.substitute(c=c, type=service_type))

    # unlabeled: the rule flags these, the labels do not
    namespace = "monitoring" if c in FP_CONFIGMAP_CHARTS else "{{ .Release.Namespace }}"
    w.write(f"{base}/templates/configmap.yaml", _TPL_CONFIGMAP.substitute(c=c, namespace=namespace))

    host = "{{ .Values.ingress.host }}"
    if "host" in (first, second):
        host = f"app{c}.internal.example.com"
        w.label(f"{base}/templates/ingress.yaml", HELMING, "spec.rules[0].host", "hard-coded ingress host")
    w.write(f"{base}/templates/ingress.yaml", _TPL_INGRESS.substitute(c=c, host=host))


def _deployment(name: str, ns: str, image: str, sa: Optional[str] = None, claim: Optional[str] = None) -> str:
    extra = f"      serviceAccountName: {sa}\n" if sa else ""
    volumes = ""
    if claim:
        volumes = f"      volumes:\n        - name: data\n          persistentVolumeClaim:\n            claimName: {claim}\n"
    return _DEPLOYMENT.substitute(name=name, ns=ns, image=image, extra_pod=extra, volumes=volumes)


def _write_manifests(w: _Writer, part: str, k: int, rng: random.Random) -> None:
    base = f"{part}/manifests"
    ns = f"synth{k}"
    images = ["nginx:1.25", "redis:7.2", "postgres:16", "busybox:1.36", "envoyproxy/envoy:v1.29"]
    n = 0

    def put(stem: str, text: str) -> str:
        nonlocal n
        rel = f"{base}/{n:03d}-{stem}.yaml"
        n += 1
        return w.write(rel, text)

    for i in range(5):
        f = put("dangling", _deployment(f"orphan-user-{i}", ns, rng.choice(images), sa=f"missing-sa-{i}"))
        w.label(f, ORPHANISM, f"{POD}.serviceAccountName", "reference to undeclared ServiceAccount")
    sfx = f"-{k}"
    idle = [
        ("idle-sa", _SERVICE_ACCOUNT.substitute(name="idle-sa", ns=ns)),
        ("idle-clusterrole", _CLUSTER_ROLE.substitute(name=f"idle-reader{sfx}")),
        ("idle-storageclass", _STORAGE_CLASS.substitute(name=f"idle-ssd{sfx}")),
        ("idle-pv", _PV.substitute(name=f"idle-pv{sfx}", sc_line="")),
        ("idle-role", _ROLE.substitute(name="idle-role", ns=ns)),
    ]
    for stem, text in idle:
        f = put(stem, text)
        w.label(f, ORPHANISM, "metadata.name", "declared but never referenced")
    # unlabeled: ClusterRoles provided by an add-on outside the corpus
    for i in range(2):
        put(
            "external-binding",
            _BINDING.substitute(
                kind="ClusterRoleBinding",
                name=f"external-reader-{i}{sfx}",
                ns_line="",
                role_kind="ClusterRole",
                role=f"external-metrics-reader-{i}",
                sa=f"bound-sa-{i}",
                ns=ns,
            ).replace("\n\n", "\n"),
        )
        put("bound-sa", _SERVICE_ACCOUNT.substitute(name=f"bound-sa-{i}", ns=ns))

    i = 0
    groups = ("sa", "storage", "rbac", "plain")
    while n < 100:
        remaining = 100 - n
        group = groups[i % len(groups)]
        size = {"sa": 2, "storage": 4, "rbac": 3, "plain": 2}[group]
        if size > remaining:
            group, size = "plain", 2
            if remaining == 1:
                put("configmap", _CONFIGMAP.substitute(name=f"extra-{i}", ns=ns, mode="standby"))
                break
        if group == "sa":
            put("sa", _SERVICE_ACCOUNT.substitute(name=f"app-sa-{i}", ns=ns))
            put("deploy", _deployment(f"app-{i}", ns, rng.choice(images), sa=f"app-sa-{i}"))
        elif group == "storage":
            put("storageclass", _STORAGE_CLASS.substitute(name=f"sc-{i}{sfx}"))
            put("pv", _PV.substitute(name=f"pv-{i}{sfx}", sc_line=f"  storageClassName: sc-{i}{sfx}\n"))
            put("pvc", _PVC.substitute(name=f"data-{i}", ns=ns, sc=f"sc-{i}{sfx}", pv=f"pv-{i}{sfx}"))
            put("deploy", _deployment(f"db-{i}", ns, rng.choice(images), claim=f"data-{i}"))
        elif group == "rbac":
            put("role", _ROLE.substitute(name=f"role-{i}", ns=ns))
            put("sa", _SERVICE_ACCOUNT.substitute(name=f"rbac-sa-{i}", ns=ns))
            put(
                "rolebinding",
                _BINDING.substitute(
                    kind="RoleBinding",
                    name=f"role-{i}",
                    ns_line=f"  namespace: {ns}",
                    role_kind="Role",
                    role=f"role-{i}",
                    sa=f"rbac-sa-{i}",
                    ns=ns,
                ),
            )
        else:
            put("configmap", _CONFIGMAP.substitute(name=f"settings-{i}", ns=ns, mode=rng.choice(["active", "standby"])))
            put("service", _SERVICE.substitute(name=f"web-{i}", ns=ns))
        i += 1


def generate_corpus(root, seed: int = 0, scale: int = 1) -> SynthCorpus:
    """Write ``scale`` independent 200-script parts under ``root`` and return their labels."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    w = _Writer(root)
    for k in range(scale):
        part = f"part{k}"
        for c in range(CHARTS):
            _write_chart(w, part, c, rng)
        _write_manifests(w, part, k, rng)
    return SynthCorpus(root, w.count, w.defects)


def write_dataset(defects, path) -> Path:
    """Write labels in the CSV layout that ``load_dataset`` reads."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["id", "file", "key_path", "line", "category", "sub_category", "pattern_note"])
        for d in defects:
            sub = d.category.sub_category.value if d.category.sub_category else ""
            out.writerow(
                [d.id, d.file, "" if d.key_path is None else str(d.key_path), d.line or "", d.category.category.value, sub, d.pattern_note or ""]
            )
    return path
