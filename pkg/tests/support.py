"""Shared test fixtures: independent oracles and REST scripting helpers.

The oracles here are deliberately written from the documented behavior alone
(token wire format, ACL closure rules, tenant lifecycle) and never import the
production implementations they check.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any

OPERATOR_KEY = "op-secret-key"
MASTER_KEY = b"0123456789abcdef0123456789abcdef"
SIGNING_KEY = b"fedcba9876543210fedcba9876543210"


# -- independent compact-token encoder ---------------------------------------


def oracle_b64url(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def oracle_token(claims: dict[str, Any], key: bytes) -> str:
    """Encode a token exactly per the wire contract, stdlib only."""
    header = oracle_b64url(b'{"alg":"HS256","typ":"JWT"}')
    body = oracle_b64url(
        json.dumps(claims, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    )
    mac = hmac.new(key, f"{header}.{body}".encode("ascii"), hashlib.sha256).digest()
    return f"{header}.{body}.{oracle_b64url(mac)}"


def oracle_decode(token: str) -> dict[str, Any]:
    """Decode claims without verification (for assertions on issued tokens)."""
    body = token.split(".")[1]
    return json.loads(base64.urlsafe_b64decode(body + "=" * (-len(body) % 4)))


# -- brute-force ACL oracle ----------------------------------------------------

RANK = {"READ": 1, "WRITE": 2, "OWNER": 3}


@dataclass
class AclOracle:
    """Naive recomputation of vault access from first principles."""

    owners: dict[str, str] = field(default_factory=dict)  # cred -> owner rendered
    shares: dict[tuple[str, str], str] = field(default_factory=dict)  # (cred, grantee) -> perm
    group_members: dict[str, set[str]] = field(default_factory=dict)  # group id -> rendered members

    def store(self, cred: str, owner: str) -> None:
        self.owners[cred] = owner

    def delete(self, cred: str) -> None:
        self.owners.pop(cred, None)
        for key in [k for k in self.shares if k[0] == cred]:
            del self.shares[key]

    def share(self, cred: str, grantee: str, perm: str) -> None:
        self.shares[(cred, grantee)] = perm

    def revoke(self, cred: str, grantee: str) -> None:
        self.shares.pop((cred, grantee), None)

    def add_to_group(self, group_id: str, member: str) -> None:
        self.group_members.setdefault(group_id, set()).add(member)

    def remove_from_group(self, group_id: str, member: str) -> None:
        self.group_members.get(group_id, set()).discard(member)

    def in_group(self, group_id: str, entity: str) -> bool:
        """Transitive membership: groups may contain groups."""
        seen = set()
        queue = deque([group_id])
        while queue:
            current = queue.popleft()
            if current in seen:
                continue
            seen.add(current)
            for member in self.group_members.get(current, ()):
                if member == entity:
                    return True
                if member.startswith("group:"):
                    queue.append(member.split(":")[2])
        return False

    def allowed(self, entity: str, cred: str, perm: str) -> bool:
        if cred not in self.owners:
            return False
        if self.owners[cred] == entity:
            return True
        need = RANK[perm]
        direct = self.shares.get((cred, entity))
        if direct is not None and RANK[direct] >= need:
            return True
        for (share_cred, grantee), granted in self.shares.items():
            if share_cred != cred or RANK[granted] < need:
                continue
            if grantee.startswith("group:") and self.in_group(grantee.split(":")[2], entity):
                return True
        return False


# -- tenant lifecycle model --------------------------------------------------------


@dataclass
class ModelTenant:
    kind: str  # ADMIN | CHILD
    status: str  # REQUESTED | ACTIVE | DENIED | DEACTIVATED
    parent: str | None
    approved: bool = False  # an operator approval event happened


class TenantModel:
    """Reference lifecycle machine; mirrors only the documented rules."""

    MAX_DEPTH = 4

    def __init__(self) -> None:
        self.tenants: dict[str, ModelTenant] = {}

    def request(self, tenant_id: str) -> str:
        self.tenants[tenant_id] = ModelTenant("ADMIN", "REQUESTED", None)
        return "REQUESTED"

    def decide(self, tenant_id: str, approve: bool) -> str | None:
        tenant = self.tenants.get(tenant_id)
        if tenant is None:
            return None  # NOT_FOUND
        if tenant.status != "REQUESTED":
            return "CONFLICT"
        tenant.status = "ACTIVE" if approve else "DENIED"
        tenant.approved = approve
        return tenant.status

    def depth(self, tenant_id: str) -> int:
        depth = 1
        parent = self.tenants[tenant_id].parent
        while parent is not None:
            depth += 1
            parent = self.tenants[parent].parent
        return depth

    def chain_active(self, tenant_id: str) -> bool:
        current: str | None = tenant_id
        while current is not None:
            tenant = self.tenants.get(current)
            if tenant is None or tenant.status != "ACTIVE":
                return False
            current = tenant.parent
        return True

    def create_child(self, parent_id: str, child_id: str) -> str:
        if not self.chain_active(parent_id):
            return "TENANT_INACTIVE"
        if self.depth(parent_id) >= self.MAX_DEPTH:
            return "VALIDATION_ERROR"
        self.tenants[child_id] = ModelTenant("CHILD", "ACTIVE", parent_id)
        return "ACTIVE"

    def deactivate(self, tenant_id: str) -> str | None:
        tenant = self.tenants.get(tenant_id)
        if tenant is None:
            return None
        if tenant.status != "ACTIVE":
            return "CONFLICT"
        tenant.status = "DEACTIVATED"
        return "DEACTIVATED"

    def authenticates(self, tenant_id: str) -> bool:
        return self.chain_active(tenant_id)

    def invariant_no_unapproved_active_admin(self) -> bool:
        return all(
            t.approved for t in self.tenants.values() if t.kind == "ADMIN" and t.status == "ACTIVE"
        )


# -- REST scripting helpers ------------------------------------------------------


def request_tenant(client, name: str, redirect_uris: list[str] | None = None) -> str:
    response = client.post(
        "/api/v1/tenants",
        json={
            "name": name,
            "contact_email": f"{name}@example.org",
            "redirect_uris": redirect_uris or [f"https://{name}.example.org/cb"],
        },
    )
    assert response.status_code == 201, response.text
    return response.json()["tenant_id"]


def approve_tenant(client, tenant_id: str, operator_key: str = OPERATOR_KEY) -> tuple[str, str]:
    response = client.post(
        f"/api/v1/tenants/{tenant_id}/decision",
        json={"decision": "APPROVE"},
        headers={"X-Operator-Key": operator_key},
    )
    assert response.status_code == 200, response.text
    doc = response.json()
    return doc["client_id"], doc["client_secret"]


def make_admin_tenant(client, name: str, redirect_uris: list[str] | None = None):
    tenant_id = request_tenant(client, name, redirect_uris)
    creds = approve_tenant(client, tenant_id)
    return tenant_id, creds


def basic(creds: tuple[str, str]) -> dict[str, str]:
    token = base64.b64encode(f"{creds[0]}:{creds[1]}".encode()).decode()
    return {"Authorization": f"Basic {token}"}


def bearer(token: str) -> dict[str, str]:
    return {"Authorization": f"Bearer {token}"}
