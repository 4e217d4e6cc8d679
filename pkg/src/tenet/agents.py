"""Agent principals and the three credential-retrieval schemes.

Agents are restricted principals under a tenant: they hold a fixed
`credential.fetch` scope and can call exactly one data operation. The three
retrieval schemes differ only in how the caller authenticates (agent token,
middleware tenant credentials, or end-user bearer token); all resolve to the
vault's access check and return identical payloads for identical grants.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

from .clock import Clock
from .errors import access_denied, invalid_client, not_found
from .ids import EntityKind, EntityRef, generate_id
from .store import RecordStore, Txn
from .tenants import TenantContext, hash_secret, new_client_secret, verify_secret
from .tokens import TokenEngine
from .vault import CredentialType, Permission, SecretsVault

AGENTS = "agents"

AGENT_SCOPES = ("credential.fetch",)


class AgentStatus(str, Enum):
    ACTIVE = "ACTIVE"
    DELETED = "DELETED"


@dataclass
class AgentRecord:
    agent_id: str
    tenant_id: str
    status: AgentStatus
    scopes: tuple[str, ...] = AGENT_SCOPES
    created_at: float = 0.0

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "AgentRecord":
        return cls(
            agent_id=doc["agent_id"],
            tenant_id=doc["tenant_id"],
            status=AgentStatus(doc["status"]),
            created_at=doc.get("created_at", 0.0),
        )

    def to_public_doc(self) -> dict[str, Any]:
        return {
            "agent_id": self.agent_id,
            "tenant_id": self.tenant_id,
            "status": self.status.value,
            "scopes": list(self.scopes),
            "created_at": self.created_at,
        }

    def ref(self) -> EntityRef:
        return EntityRef.agent(self.tenant_id, self.agent_id)


class AgentRegistry:
    def __init__(self, store: RecordStore, clock: Clock):
        self._store = store
        self._clock = clock

    def register(self, tenant_id: str) -> tuple[str, str]:
        """Returns (agent_id, secret); the secret is not retrievable later."""
        agent_id = generate_id("agt")
        secret = new_client_secret()
        secret_hash = hash_secret(secret)

        def op(txn: Txn) -> None:
            txn.put(
                AGENTS,
                agent_id,
                {
                    "agent_id": agent_id,
                    "tenant_id": tenant_id,
                    "status": AgentStatus.ACTIVE.value,
                    "secret_hash": secret_hash,
                    "created_at": self._clock.now(),
                },
            )

        self._store.transact(op)
        return agent_id, secret

    def delete(self, tenant_id: str, agent_id: str) -> None:
        def op(txn: Txn) -> None:
            doc = txn.get(AGENTS, agent_id)
            if doc is None or doc["tenant_id"] != tenant_id:
                raise not_found(f"agent {agent_id} not found")
            if doc["status"] == AgentStatus.DELETED.value:
                raise not_found(f"agent {agent_id} not found")
            doc["status"] = AgentStatus.DELETED.value
            txn.put(AGENTS, agent_id, doc)

        self._store.transact(op)

    def get(self, tenant_id: str, agent_id: str) -> AgentRecord:
        doc = self._store.get(AGENTS, agent_id)
        if doc is None or doc["tenant_id"] != tenant_id:
            raise not_found(f"agent {agent_id} not found")
        return AgentRecord.from_doc(doc)

    def list(self, tenant_id: str) -> list[AgentRecord]:
        records = [
            AgentRecord.from_doc(d)
            for _, d in self._store.scan(AGENTS)
            if d["tenant_id"] == tenant_id and d["status"] == AgentStatus.ACTIVE.value
        ]
        records.sort(key=lambda r: r.created_at)
        return records

    def authenticate(self, agent_id: str, secret: str) -> AgentRecord:
        doc = self._store.get(AGENTS, agent_id)
        if (
            doc is None
            or doc["status"] != AgentStatus.ACTIVE.value
            or not verify_secret(secret, doc["secret_hash"])
        ):
            raise invalid_client("unknown agent or bad secret")
        return AgentRecord.from_doc(doc)

    def status(self, agent_id: str) -> tuple[bool, bool]:
        """(exists, active) — consumed by token validation."""
        doc = self._store.get(AGENTS, agent_id)
        if doc is None:
            return False, False
        return True, doc["status"] == AgentStatus.ACTIVE.value


@dataclass
class FetchResult:
    ctype: CredentialType
    payload: bytes
    version: int


class CredentialBroker:
    """Dispatches the three retrieval schemes onto one vault check."""

    def __init__(self, vault: SecretsVault, tokens: TokenEngine):
        self._vault = vault
        self._tokens = tokens

    def fetch_as_agent(self, agent_token: str, credential_token: str) -> FetchResult:
        claims = self._tokens.validate(agent_token, expected_typ="agent")
        agent_ref = claims.subject_ref()
        if agent_ref.kind is not EntityKind.AGENT:
            raise access_denied("agent token required")
        tenant_ref = EntityRef.tenant(agent_ref.tenant_id)
        if self._vault.check_access(agent_ref, credential_token, Permission.READ):
            caller = agent_ref
        elif self._vault.check_access(tenant_ref, credential_token, Permission.READ):
            caller = tenant_ref
        else:
            raise access_denied("credential is not shared with this agent or its tenant")
        ctype, payload, version = self._vault.fetch_credential(caller, credential_token)
        return FetchResult(ctype, payload, version)

    def fetch_delegated(self, middleware: TenantContext, credential_token: str) -> FetchResult:
        tenant_ref = EntityRef.tenant(middleware.tenant_id)
        if not self._vault.check_access(tenant_ref, credential_token, Permission.READ):
            raise access_denied("credential is not shared with this tenant")
        ctype, payload, version = self._vault.fetch_credential(tenant_ref, credential_token)
        return FetchResult(ctype, payload, version)

    def fetch_as_user(self, bearer_token: str, credential_token: str) -> FetchResult:
        claims = self._tokens.validate(bearer_token, expected_typ="access")
        caller = claims.subject_ref()
        ctype, payload, version = self._vault.fetch_credential(caller, credential_token)
        return FetchResult(ctype, payload, version)
