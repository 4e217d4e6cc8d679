"""Service accounts: non-human principals owned by a tenant."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .clock import Clock
from .errors import conflict, invalid_client, not_found, validation_error
from .ids import generate_id
from .store import RecordStore, Txn
from .tenants import hash_secret, new_client_secret, verify_secret

SERVICE_ACCOUNTS = "service_accounts"
SA_NAMES = "service_account_names"  # "<tenant>:<name>" -> {account_id}, ACTIVE only


class AccountStatus(str, Enum):
    ACTIVE = "ACTIVE"
    DELETED = "DELETED"


@dataclass
class ServiceAccount:
    account_id: str
    tenant_id: str
    name: str
    status: AccountStatus
    roles: list[str] = field(default_factory=list)
    attributes: dict[str, str] = field(default_factory=dict)
    created_at: float = 0.0

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "ServiceAccount":
        return cls(
            account_id=doc["account_id"],
            tenant_id=doc["tenant_id"],
            name=doc["name"],
            status=AccountStatus(doc["status"]),
            roles=list(doc.get("roles", [])),
            attributes=dict(doc.get("attributes", {})),
            created_at=doc.get("created_at", 0.0),
        )

    def to_public_doc(self) -> dict[str, Any]:
        return {
            "account_id": self.account_id,
            "tenant_id": self.tenant_id,
            "name": self.name,
            "status": self.status.value,
            "roles": list(self.roles),
            "attributes": dict(self.attributes),
            "created_at": self.created_at,
        }


class ServiceAccountRegistry:
    def __init__(self, store: RecordStore, clock: Clock):
        self._store = store
        self._clock = clock

    def register(
        self,
        tenant_id: str,
        name: str,
        roles: list[str] | None = None,
        attributes: dict[str, str] | None = None,
    ) -> tuple[str, str]:
        """Returns (account_id, secret); the secret is not retrievable later."""
        if not name:
            raise validation_error("service account name must be non-empty")
        account_id = generate_id("svc")
        secret = new_client_secret()
        secret_hash = hash_secret(secret)

        def op(txn: Txn) -> None:
            name_key = f"{tenant_id}:{name}"
            if txn.get(SA_NAMES, name_key) is not None:
                raise conflict(f"service account name {name!r} already active")
            txn.put(SA_NAMES, name_key, {"account_id": account_id})
            txn.put(
                SERVICE_ACCOUNTS,
                account_id,
                {
                    "account_id": account_id,
                    "tenant_id": tenant_id,
                    "name": name,
                    "status": AccountStatus.ACTIVE.value,
                    "roles": list(roles or []),
                    "attributes": dict(attributes or {}),
                    "secret_hash": secret_hash,
                    "created_at": self._clock.now(),
                },
            )

        self._store.transact(op)
        return account_id, secret

    def delete(self, tenant_id: str, account_id: str) -> None:
        def op(txn: Txn) -> None:
            doc = txn.get(SERVICE_ACCOUNTS, account_id)
            if doc is None or doc["tenant_id"] != tenant_id:
                raise not_found(f"service account {account_id} not found")
            if doc["status"] == AccountStatus.DELETED.value:
                raise not_found(f"service account {account_id} not found")
            doc["status"] = AccountStatus.DELETED.value
            txn.put(SERVICE_ACCOUNTS, account_id, doc)
            txn.delete(SA_NAMES, f"{tenant_id}:{doc['name']}")

        self._store.transact(op)

    def get(self, tenant_id: str, account_id: str) -> ServiceAccount:
        doc = self._store.get(SERVICE_ACCOUNTS, account_id)
        if doc is None or doc["tenant_id"] != tenant_id:
            raise not_found(f"service account {account_id} not found")
        return ServiceAccount.from_doc(doc)

    def list(self, tenant_id: str) -> list[ServiceAccount]:
        accounts = [
            ServiceAccount.from_doc(d)
            for _, d in self._store.scan(SERVICE_ACCOUNTS)
            if d["tenant_id"] == tenant_id and d["status"] == AccountStatus.ACTIVE.value
        ]
        accounts.sort(key=lambda a: a.created_at)
        return accounts

    def authenticate(self, account_id: str, secret: str) -> ServiceAccount:
        doc = self._store.get(SERVICE_ACCOUNTS, account_id)
        if (
            doc is None
            or doc["status"] != AccountStatus.ACTIVE.value
            or not verify_secret(secret, doc["secret_hash"])
        ):
            raise invalid_client("unknown service account or bad secret")
        return ServiceAccount.from_doc(doc)

    def status(self, account_id: str) -> tuple[bool, bool]:
        """(exists, active) — consumed by token validation."""
        doc = self._store.get(SERVICE_ACCOUNTS, account_id)
        if doc is None:
            return False, False
        return True, doc["status"] == AccountStatus.ACTIVE.value
