"""Hierarchical tenant registry.

Administrator tenants are created in REQUESTED state and wait for a manual
operator decision; children of an ACTIVE tenant are created pre-approved.
Deactivation is enforced by walking the ancestor chain at authentication
time rather than rewriting descendant rows.
"""

from __future__ import annotations

import base64
import hashlib
import secrets
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable
from urllib.parse import urlparse

from .clock import Clock
from .errors import (
    access_denied,
    conflict,
    invalid_client,
    not_found,
    tenant_inactive,
    validation_error,
)
from .ids import generate_id
from .store import RecordStore, Txn

MAX_DEPTH = 4

TENANTS = "tenants"
TENANT_CREDS = "tenant_creds"
AUDIT = "audit"
COUNTERS = "counters"


class TenantKind(str, Enum):
    ADMIN = "ADMIN"
    CHILD = "CHILD"


class TenantStatus(str, Enum):
    REQUESTED = "REQUESTED"
    ACTIVE = "ACTIVE"
    DENIED = "DENIED"
    DEACTIVATED = "DEACTIVATED"


class Decision(str, Enum):
    APPROVE = "APPROVE"
    DENY = "DENY"


@dataclass
class TenantProfile:
    name: str
    contact_email: str
    redirect_uris: list[str] = field(default_factory=list)
    description: str = ""

    def validate(self) -> None:
        if not self.name or len(self.name) > 128:
            raise validation_error("tenant name must be 1-128 characters")
        if "@" not in self.contact_email:
            raise validation_error("contact_email must be an email address")
        for uri in self.redirect_uris:
            parsed = urlparse(uri)
            if not parsed.scheme or not parsed.netloc:
                raise validation_error(f"redirect_uri must be absolute: {uri!r}")

    def to_doc(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "contact_email": self.contact_email,
            "redirect_uris": list(self.redirect_uris),
            "description": self.description,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "TenantProfile":
        return cls(
            name=doc["name"],
            contact_email=doc["contact_email"],
            redirect_uris=list(doc["redirect_uris"]),
            description=doc.get("description", ""),
        )


@dataclass
class Tenant:
    tenant_id: str
    parent_id: str | None
    kind: TenantKind
    status: TenantStatus
    profile: TenantProfile
    created_at: int
    decided_at: int | None

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "Tenant":
        return cls(
            tenant_id=doc["tenant_id"],
            parent_id=doc.get("parent_id"),
            kind=TenantKind(doc["kind"]),
            status=TenantStatus(doc["status"]),
            profile=TenantProfile.from_doc(doc["profile"]),
            created_at=doc["created_at"],
            decided_at=doc.get("decided_at"),
        )


@dataclass
class TenantCredentials:
    """Plaintext secret appears here exactly once; only a salted hash is stored."""

    client_id: str
    client_secret: str
    issued_at: int


@dataclass
class TenantContext:
    tenant_id: str
    kind: TenantKind
    status: TenantStatus
    ancestor_path: list[str]  # root first, ends with tenant_id


def hash_secret(secret: str, salt: bytes | None = None) -> str:
    salt = salt if salt is not None else secrets.token_bytes(16)
    digest = hashlib.sha256(salt + secret.encode("utf-8")).digest()
    return "sha256${}${}".format(
        base64.b64encode(salt).decode("ascii"), base64.b64encode(digest).decode("ascii")
    )


def verify_secret(secret: str, stored: str) -> bool:
    try:
        scheme, salt_b64, _ = stored.split("$")
        if scheme != "sha256":
            return False
        salt = base64.b64decode(salt_b64)
    except (ValueError, TypeError):
        return False
    return secrets.compare_digest(hash_secret(secret, salt), stored)


def new_client_secret() -> str:
    return base64.urlsafe_b64encode(secrets.token_bytes(32)).decode("ascii").rstrip("=")


def append_audit(txn: Txn, ts: int, actor: str, action: str, tenant_id: str, outcome: str) -> None:
    counter = txn.get(COUNTERS, "audit") or {"n": 0}
    n = counter["n"] + 1
    txn.put(COUNTERS, "audit", {"n": n})
    txn.put(AUDIT, f"{n:012d}", {"ts": ts, "actor": actor, "action": action, "tenant_id": tenant_id, "outcome": outcome})


class TenantManager:
    def __init__(
        self,
        store: RecordStore,
        clock: Clock,
        operator_key: str,
        on_activate: Callable[[Txn, str], None] | None = None,
    ):
        self._store = store
        self._clock = clock
        self._operator_key = operator_key
        self._on_activate = on_activate

    # -- lifecycle -------------------------------------------------------

    def request_admin_tenant(self, profile: TenantProfile) -> str:
        profile.validate()
        tenant_id = generate_id("ten")
        now = self._clock.now()

        def op(txn: Txn) -> None:
            seq = self._next_seq(txn)
            txn.put(
                TENANTS,
                tenant_id,
                {
                    "tenant_id": tenant_id,
                    "parent_id": None,
                    "kind": TenantKind.ADMIN.value,
                    "status": TenantStatus.REQUESTED.value,
                    "profile": profile.to_doc(),
                    "created_at": now,
                    "decided_at": None,
                    "seq": seq,
                    "client_id": None,
                },
            )
            append_audit(txn, now, "anonymous", "tenant.request", tenant_id, "ok")

        self._store.transact(op)
        return tenant_id

    def decide_tenant_request(
        self, operator_key: str, tenant_id: str, decision: Decision
    ) -> TenantCredentials | None:
        if operator_key != self._operator_key:
            raise access_denied("operator authority required")
        now = self._clock.now()
        creds = self._new_credentials(now) if decision == Decision.APPROVE else None

        def op(txn: Txn) -> None:
            doc = txn.get(TENANTS, tenant_id)
            if doc is None:
                raise not_found(f"tenant {tenant_id} not found")
            if doc["status"] != TenantStatus.REQUESTED.value:
                raise conflict("tenant request already decided")
            doc["decided_at"] = now
            if decision == Decision.APPROVE:
                assert creds is not None
                doc["status"] = TenantStatus.ACTIVE.value
                doc["client_id"] = creds.client_id
                self._put_credentials(txn, creds, tenant_id)
                txn.put(TENANTS, tenant_id, doc)
                if self._on_activate is not None:
                    self._on_activate(txn, tenant_id)
                append_audit(txn, now, "operator", "tenant.approve", tenant_id, "ok")
            else:
                doc["status"] = TenantStatus.DENIED.value
                txn.put(TENANTS, tenant_id, doc)
                append_audit(txn, now, "operator", "tenant.deny", tenant_id, "ok")

        self._store.transact(op)
        return creds

    def create_child_tenant(
        self, parent_client_id: str, parent_client_secret: str, profile: TenantProfile
    ) -> tuple[str, TenantCredentials]:
        profile.validate()
        now = self._clock.now()
        tenant_id = generate_id("ten")
        creds = self._new_credentials(now)

        def op(txn: Txn) -> str:
            parent = self._authenticate_in_txn(txn, parent_client_id, parent_client_secret)
            if len(parent.ancestor_path) + 1 > MAX_DEPTH:
                raise validation_error(f"tenant hierarchy depth limit is {MAX_DEPTH}")
            seq = self._next_seq(txn)
            txn.put(
                TENANTS,
                tenant_id,
                {
                    "tenant_id": tenant_id,
                    "parent_id": parent.tenant_id,
                    "kind": TenantKind.CHILD.value,
                    "status": TenantStatus.ACTIVE.value,
                    "profile": profile.to_doc(),
                    "created_at": now,
                    "decided_at": now,
                    "seq": seq,
                    "client_id": creds.client_id,
                },
            )
            self._put_credentials(txn, creds, tenant_id)
            if self._on_activate is not None:
                self._on_activate(txn, tenant_id)
            append_audit(txn, now, parent_client_id, "tenant.create_child", tenant_id, "ok")
            return parent.tenant_id

        self._store.transact(op)
        return tenant_id, creds

    def authenticate_client(self, client_id: str, client_secret: str) -> TenantContext:
        def op(txn: Txn) -> TenantContext:
            return self._authenticate_in_txn(txn, client_id, client_secret)

        return self._store.transact(op)

    def rotate_credentials(self, client_id: str, client_secret: str, tenant_id: str) -> TenantCredentials:
        now = self._clock.now()
        new_secret = new_client_secret()

        def op(txn: Txn) -> None:
            doc = txn.get(TENANTS, tenant_id)
            if doc is None:
                raise not_found(f"tenant {tenant_id} not found")
            cred_doc = txn.get(TENANT_CREDS, client_id)
            if (
                cred_doc is None
                or cred_doc["tenant_id"] != tenant_id
                or not verify_secret(client_secret, cred_doc["secret_hash"])
            ):
                raise invalid_client()
            cred_doc["secret_hash"] = hash_secret(new_secret)
            cred_doc["issued_at"] = now
            txn.put(TENANT_CREDS, client_id, cred_doc)
            append_audit(txn, now, client_id, "tenant.rotate", tenant_id, "ok")

        self._store.transact(op)
        return TenantCredentials(client_id=client_id, client_secret=new_secret, issued_at=now)

    def deactivate_tenant(
        self,
        tenant_id: str,
        *,
        operator_key: str | None = None,
        parent_client_id: str | None = None,
        parent_client_secret: str | None = None,
    ) -> Tenant:
        now = self._clock.now()

        def op(txn: Txn) -> Tenant:
            doc = txn.get(TENANTS, tenant_id)
            if doc is None:
                raise not_found(f"tenant {tenant_id} not found")
            if operator_key is not None and operator_key == self._operator_key:
                actor = "operator"
            elif parent_client_id is not None and parent_client_secret is not None:
                caller = self._authenticate_in_txn(txn, parent_client_id, parent_client_secret)
                if doc.get("parent_id") != caller.tenant_id:
                    raise access_denied("only the direct parent or the operator may deactivate")
                actor = parent_client_id
            else:
                raise access_denied("deactivation requires operator key or parent credentials")
            if doc["status"] != TenantStatus.ACTIVE.value:
                raise conflict("tenant is not ACTIVE")
            doc["status"] = TenantStatus.DEACTIVATED.value
            txn.put(TENANTS, tenant_id, doc)
            append_audit(txn, now, actor, "tenant.deactivate", tenant_id, "ok")
            return Tenant.from_doc(doc)

        return self._store.transact(op)

    # -- reads -----------------------------------------------------------

    def get_tenant(self, tenant_id: str) -> Tenant:
        doc = self._store.get(TENANTS, tenant_id)
        if doc is None:
            raise not_found(f"tenant {tenant_id} not found")
        return Tenant.from_doc(doc)

    def list_children(self, tenant_id: str) -> list[Tenant]:
        if self._store.get(TENANTS, tenant_id) is None:
            raise not_found(f"tenant {tenant_id} not found")
        children = [doc for _, doc in self._store.scan(TENANTS) if doc.get("parent_id") == tenant_id]
        children.sort(key=lambda d: (d["created_at"], d["seq"]))
        return [Tenant.from_doc(d) for d in children]

    def list_tenants(self, status: TenantStatus | None = None) -> list[Tenant]:
        docs = [doc for _, doc in self._store.scan(TENANTS)]
        if status is not None:
            docs = [d for d in docs if d["status"] == status.value]
        docs.sort(key=lambda d: (d["created_at"], d["seq"]))
        return [Tenant.from_doc(d) for d in docs]

    def client_id_for(self, tenant_id: str) -> str | None:
        doc = self._store.get(TENANTS, tenant_id)
        return None if doc is None else doc.get("client_id")

    def tenant_for_client(self, client_id: str) -> str | None:
        doc = self._store.get(TENANT_CREDS, client_id)
        return None if doc is None else doc["tenant_id"]

    def audit_log(self) -> list[dict[str, Any]]:
        return [doc for _, doc in self._store.scan(AUDIT)]

    def is_operator(self, key: str) -> bool:
        return key == self._operator_key

    # -- chain checks (shared with token validation) ----------------------

    def chain_active(self, tenant_id: str) -> bool:
        """True iff the tenant and every ancestor are ACTIVE."""
        try:
            self._ancestor_path_if_active(lambda c, k: self._store.get(c, k), tenant_id)
        except Exception:
            return False
        return True

    # -- internals ---------------------------------------------------------

    def _authenticate_in_txn(self, txn: Txn, client_id: str, client_secret: str) -> TenantContext:
        cred_doc = txn.get(TENANT_CREDS, client_id)
        if cred_doc is None or not verify_secret(client_secret, cred_doc["secret_hash"]):
            raise invalid_client()
        tenant_id = cred_doc["tenant_id"]
        doc = txn.get(TENANTS, tenant_id)
        assert doc is not None, "credentials without tenant row"
        path = self._ancestor_path_if_active(txn.get, tenant_id)
        return TenantContext(
            tenant_id=tenant_id,
            kind=TenantKind(doc["kind"]),
            status=TenantStatus(doc["status"]),
            ancestor_path=path,
        )

    def _ancestor_path_if_active(
        self, get: Callable[[str, str], Any], tenant_id: str
    ) -> list[str]:
        path: list[str] = []
        seen: set[str] = set()
        current: str | None = tenant_id
        while current is not None:
            if current in seen or len(path) >= MAX_DEPTH:
                raise tenant_inactive("tenant hierarchy is malformed")
            seen.add(current)
            doc = get(TENANTS, current)
            if doc is None:
                raise tenant_inactive("ancestor tenant missing")
            if doc["status"] != TenantStatus.ACTIVE.value:
                raise tenant_inactive(f"tenant {current} is {doc['status']}")
            path.append(current)
            current = doc.get("parent_id")
        path.reverse()
        return path

    def _new_credentials(self, now: int) -> TenantCredentials:
        return TenantCredentials(
            client_id=generate_id("cli"), client_secret=new_client_secret(), issued_at=now
        )

    def _put_credentials(self, txn: Txn, creds: TenantCredentials, tenant_id: str) -> None:
        txn.put(
            TENANT_CREDS,
            creds.client_id,
            {
                "tenant_id": tenant_id,
                "secret_hash": hash_secret(creds.client_secret),
                "issued_at": creds.issued_at,
            },
        )

    def _next_seq(self, txn: Txn) -> int:
        counter = txn.get(COUNTERS, "entity") or {"n": 0}
        n = counter["n"] + 1
        txn.put(COUNTERS, "entity", {"n": n})
        return n
