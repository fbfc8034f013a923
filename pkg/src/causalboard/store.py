"""Project persistence: one versioned JSON document per project.

A project bundles the dataset reference, the model tree, parsed findings,
the exchange cache, and a hash-chained audit log. Saves are canonical
(sorted keys, LF endings) so versioned project files diff cleanly.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .graph import CausalModel, ModelTree
from .ids import ulid
from .llm import Exchange

SCHEMA_VERSION = 1


class StoreError(ValueError):
    """Unreadable, unwritable, or invalid project document."""


@dataclass
class AuditEntry:
    timestamp: float
    actor: str
    operation: str
    payload_hash: str
    prev_hash: str
    entry_hash: str = ""

    def compute_hash(self) -> str:
        blob = json.dumps(
            [self.timestamp, self.actor, self.operation, self.payload_hash,
             self.prev_hash],
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class Finding:
    """A parsed finding tied to the exchange it came from."""

    kind: str  # rating | confounder | mediator | latent
    model_id: str
    target_id: str  # edge id (relations) or variable id (latents)
    exchange_key: str
    payload: dict
    id: str = field(default_factory=ulid)


@dataclass
class Project:
    name: str
    dataset_path: str
    dataset_fingerprint: str
    tree: ModelTree
    findings: dict[str, Finding] = field(default_factory=dict)
    exchanges: dict[str, Exchange] = field(default_factory=dict)
    fixtures_dir: Optional[str] = None
    audit: list[AuditEntry] = field(default_factory=list)
    domain: str = ""
    id: str = field(default_factory=ulid)
    schema: int = SCHEMA_VERSION

    def record_exchange(self, ex: Exchange) -> None:
        self.exchanges.setdefault(ex.key, ex)

    def add_finding(self, f: Finding) -> None:
        if f.exchange_key not in self.exchanges:
            raise StoreError(
                f"finding references unknown exchange {f.exchange_key}"
            )
        self.findings[f.id] = f

    def append_audit(self, actor: str, operation: str, payload: dict) -> AuditEntry:
        payload_hash = hashlib.sha256(
            json.dumps(payload, sort_keys=True, ensure_ascii=False).encode()
        ).hexdigest()
        prev = self.audit[-1].entry_hash if self.audit else ""
        entry = AuditEntry(
            timestamp=time.time(),
            actor=actor,
            operation=operation,
            payload_hash=payload_hash,
            prev_hash=prev,
        )
        entry.entry_hash = entry.compute_hash()
        self.audit.append(entry)
        return entry

    def verify_audit_chain(self) -> None:
        prev = ""
        for i, entry in enumerate(self.audit):
            if entry.prev_hash != prev:
                raise StoreError(f"audit entry {i}: broken chain link")
            if entry.entry_hash != entry.compute_hash():
                raise StoreError(f"audit entry {i}: hash mismatch")
            prev = entry.entry_hash

    def validate(self) -> None:
        self.tree.validate()
        for f in self.findings.values():
            if f.exchange_key not in self.exchanges:
                raise StoreError(
                    f"finding {f.id} references missing exchange {f.exchange_key}"
                )
        self.verify_audit_chain()

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "id": self.id,
            "name": self.name,
            "domain": self.domain,
            "dataset": {
                "path": self.dataset_path,
                "fingerprint": self.dataset_fingerprint,
            },
            "tree": self.tree.to_dict(),
            "findings": {
                fid: {
                    "kind": f.kind,
                    "model_id": f.model_id,
                    "target_id": f.target_id,
                    "exchange_key": f.exchange_key,
                    "payload": f.payload,
                }
                for fid, f in sorted(self.findings.items())
            },
            "exchanges": {
                key: ex.to_dict() for key, ex in sorted(self.exchanges.items())
            },
            "fixtures_dir": self.fixtures_dir,
            "audit": [
                {
                    "timestamp": e.timestamp,
                    "actor": e.actor,
                    "operation": e.operation,
                    "payload_hash": e.payload_hash,
                    "prev_hash": e.prev_hash,
                    "entry_hash": e.entry_hash,
                }
                for e in self.audit
            ],
        }

    @staticmethod
    def from_dict(doc: dict) -> "Project":
        if doc.get("schema") != SCHEMA_VERSION:
            raise StoreError(
                f"unsupported schema version {doc.get('schema')!r}; "
                f"this build reads version {SCHEMA_VERSION}"
            )
        try:
            tree = ModelTree.from_dict(doc["tree"])
            p = Project(
                name=doc["name"],
                dataset_path=doc["dataset"]["path"],
                dataset_fingerprint=doc["dataset"]["fingerprint"],
                tree=tree,
                fixtures_dir=doc.get("fixtures_dir"),
                domain=doc.get("domain", ""),
                id=doc["id"],
            )
            for fid, f in doc.get("findings", {}).items():
                p.findings[fid] = Finding(
                    kind=f["kind"],
                    model_id=f["model_id"],
                    target_id=f["target_id"],
                    exchange_key=f["exchange_key"],
                    payload=f["payload"],
                    id=fid,
                )
            for key, ex in doc.get("exchanges", {}).items():
                p.exchanges[key] = Exchange(
                    key=key,
                    prompt=ex["prompt"],
                    response=ex["response"],
                    model=ex["model"],
                    timestamp=ex.get("timestamp", 0.0),
                    usage=ex.get("usage", {}),
                )
            for e in doc.get("audit", []):
                p.audit.append(
                    AuditEntry(
                        timestamp=e["timestamp"],
                        actor=e["actor"],
                        operation=e["operation"],
                        payload_hash=e["payload_hash"],
                        prev_hash=e["prev_hash"],
                        entry_hash=e["entry_hash"],
                    )
                )
        except KeyError as exc:
            raise StoreError(f"project document missing field {exc}") from exc
        p.validate()
        return p


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=1) + "\n"


def save(p: Project, path: str | Path) -> None:
    """Write the project atomically as canonical JSON."""
    path = Path(path)
    text = canonical_json(p.to_dict())
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8", newline="\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise StoreError(f"cannot write {path}: {exc}") from exc


def load(path: str | Path, strict: bool = False) -> Project:
    """Read and revalidate a project document.

    With strict=True the referenced dataset file is re-hashed and must match
    the stored fingerprint.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StoreError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StoreError(
            f"invalid JSON in {path} at byte offset {exc.pos}: {exc.msg}"
        ) from exc
    p = Project.from_dict(doc)
    if strict:
        from .ingest import load_csv

        ds = load_csv(p.dataset_path)
        if ds.fingerprint() != p.dataset_fingerprint:
            raise StoreError(
                f"dataset at {p.dataset_path} does not match the stored "
                f"fingerprint (strict mode)"
            )
    return p


class ProjectLock:
    """Advisory lock file held while a service keeps a project open."""

    def __init__(self, project_path: str | Path):
        self.path = Path(str(project_path) + ".lock")
        self._fd: Optional[int] = None

    def acquire(self) -> None:
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            os.write(self._fd, str(os.getpid()).encode())
        except FileExistsError:
            raise StoreError(
                f"project is locked by another process ({self.path})"
            ) from None

    def release(self) -> None:
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None
        if self.path.exists():
            self.path.unlink()

    def __enter__(self) -> "ProjectLock":
        self.acquire()
        return self

    def __exit__(self, *exc) -> None:
        self.release()
