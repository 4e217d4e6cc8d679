"""Encrypted resource-credential vault with a sharing ACL.

Payloads are sealed with AES-256-GCM under a single master key, one fresh
96-bit nonce per encryption. Credential tokens are identifiers, not bearer
secrets: every fetch path authenticates a principal first.
"""

from __future__ import annotations

import base64
import os
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .clock import Clock
from .errors import access_denied, internal, not_found, validation_error
from .ids import EntityKind, EntityRef, generate_id
from .store import RecordStore, Txn

CREDENTIALS = "credentials"
SHARES = "shares"  # credential_token -> {grantee rendered: entry}

MAX_PAYLOAD_BYTES = 64 * 1024
NONCE_BYTES = 12


class CredentialType(str, Enum):
    SSH_KEY = "SSH_KEY"
    PASSWORD = "PASSWORD"
    API_TOKEN = "API_TOKEN"
    KV_SET = "KV_SET"


class Permission(str, Enum):
    READ = "READ"
    WRITE = "WRITE"
    OWNER = "OWNER"


_PERMISSION_RANK = {Permission.READ: 1, Permission.WRITE: 2, Permission.OWNER: 3}


def permission_rank(permission: Permission) -> int:
    return _PERMISSION_RANK[permission]


def encode_kv_set(pairs: dict[str, str]) -> bytes:
    """Canonical key-value text: `key=value` lines sorted by key."""
    for key, value in pairs.items():
        if not key or "=" in key or "\n" in key:
            raise validation_error("kv keys must be non-empty and free of '=' and newlines")
        if "\n" in value:
            raise validation_error("kv values must not contain newlines")
    lines = [f"{key}={pairs[key]}" for key in sorted(pairs)]
    return "\n".join(lines).encode("utf-8")


def decode_kv_set(payload: bytes) -> dict[str, str]:
    text = payload.decode("utf-8")
    pairs: dict[str, str] = {}
    for line in text.split("\n"):
        if not line:
            continue
        key, _, value = line.partition("=")
        pairs[key] = value
    return pairs


@dataclass
class CredentialMetadata:
    credential_token: str
    tenant_id: str
    owner: EntityRef
    ctype: CredentialType
    version: int
    description: str
    created_at: float
    updated_at: float

    def to_doc(self) -> dict[str, Any]:
        return {
            "credential_token": self.credential_token,
            "tenant_id": self.tenant_id,
            "owner": self.owner.render(),
            "ctype": self.ctype.value,
            "version": self.version,
            "description": self.description,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }


@dataclass
class SharingEntry:
    credential_token: str
    grantee: EntityRef
    permission: Permission
    granted_by: EntityRef
    granted_at: float

    def to_doc(self) -> dict[str, Any]:
        return {
            "credential_token": self.credential_token,
            "grantee": self.grantee.render(),
            "permission": self.permission.value,
            "granted_by": self.granted_by.render(),
            "granted_at": self.granted_at,
        }


GroupMembership = Callable[[str, EntityRef], bool]
GranteeExists = Callable[[EntityRef], bool]

_SHAREABLE_KINDS = (
    EntityKind.USER,
    EntityKind.GROUP,
    EntityKind.TENANT,
    EntityKind.SERVICE_ACCOUNT,
    EntityKind.AGENT,
)


class SecretsVault:
    def __init__(
        self,
        store: RecordStore,
        clock: Clock,
        master_key: bytes,
        is_group_member: GroupMembership | None = None,
        grantee_exists: GranteeExists | None = None,
    ):
        if len(master_key) != 32:
            raise ValueError("master key must be exactly 32 bytes")
        self._store = store
        self._clock = clock
        self._aead = AESGCM(master_key)
        self._is_group_member = is_group_member or (lambda _gid, _ref: False)
        self._grantee_exists = grantee_exists or (lambda _ref: True)

    # -- lifecycle ----------------------------------------------------------

    def store_credential(
        self,
        caller: EntityRef,
        ctype: CredentialType,
        payload: bytes,
        description: str = "",
    ) -> str:
        if not isinstance(payload, (bytes, bytearray)):
            raise validation_error("payload must be bytes")
        if len(payload) > MAX_PAYLOAD_BYTES:
            raise validation_error(f"payload exceeds {MAX_PAYLOAD_BYTES} bytes")
        token = generate_id("cred")
        now = self._clock.now()
        nonce, ciphertext = self._seal(bytes(payload))

        def op(txn: Txn) -> None:
            txn.put(
                CREDENTIALS,
                token,
                {
                    "credential_token": token,
                    "tenant_id": caller.tenant_id,
                    "owner": caller.render(),
                    "ctype": ctype.value,
                    "ciphertext": base64.b64encode(ciphertext).decode("ascii"),
                    "nonce": base64.b64encode(nonce).decode("ascii"),
                    "version": 1,
                    "description": description,
                    "created_at": now,
                    "updated_at": now,
                },
            )

        self._store.transact(op)
        return token

    def fetch_credential(
        self, caller: EntityRef, credential_token: str
    ) -> tuple[CredentialType, bytes, int]:
        doc = self._get_doc(credential_token)
        if not self.check_access(caller, credential_token, Permission.READ):
            raise access_denied("no READ access to credential")
        payload = self._open(doc)
        return CredentialType(doc["ctype"]), payload, doc["version"]

    def update_credential(self, caller: EntityRef, credential_token: str, payload: bytes) -> int:
        if len(payload) > MAX_PAYLOAD_BYTES:
            raise validation_error(f"payload exceeds {MAX_PAYLOAD_BYTES} bytes")
        self._get_doc(credential_token)
        if not self.check_access(caller, credential_token, Permission.WRITE):
            raise access_denied("no WRITE access to credential")
        nonce, ciphertext = self._seal(bytes(payload))

        def op(txn: Txn) -> int:
            doc = txn.get(CREDENTIALS, credential_token)
            if doc is None:
                raise not_found("credential not found")
            doc["ciphertext"] = base64.b64encode(ciphertext).decode("ascii")
            doc["nonce"] = base64.b64encode(nonce).decode("ascii")
            doc["version"] += 1
            doc["updated_at"] = self._clock.now()
            txn.put(CREDENTIALS, credential_token, doc)
            return doc["version"]

        return self._store.transact(op)

    def delete_credential(self, caller: EntityRef, credential_token: str) -> None:
        self._get_doc(credential_token)
        if not self.check_access(caller, credential_token, Permission.OWNER):
            raise access_denied("only the owner may delete a credential")

        def op(txn: Txn) -> None:
            if txn.get(CREDENTIALS, credential_token) is None:
                raise not_found("credential not found")
            txn.delete(CREDENTIALS, credential_token)
            if txn.get(SHARES, credential_token) is not None:
                txn.delete(SHARES, credential_token)

        self._store.transact(op)

    # -- sharing --------------------------------------------------------------

    def share_credential(
        self,
        caller: EntityRef,
        credential_token: str,
        grantee: EntityRef,
        permission: Permission,
    ) -> None:
        self._get_doc(credential_token)
        if not self.check_access(caller, credential_token, Permission.OWNER):
            raise access_denied("only the owner may share a credential")
        if grantee.kind not in _SHAREABLE_KINDS:
            raise validation_error("grantee kind cannot hold a share")
        if not self._grantee_exists(grantee):
            raise not_found(f"grantee {grantee.render()} not found")
        now = self._clock.now()
        entry = SharingEntry(credential_token, grantee, permission, caller, now)

        def op(txn: Txn) -> None:
            if txn.get(CREDENTIALS, credential_token) is None:
                raise not_found("credential not found")
            entries = txn.get(SHARES, credential_token) or {}
            entries[grantee.render()] = entry.to_doc()
            txn.put(SHARES, credential_token, entries)

        self._store.transact(op)

    def revoke_share(self, caller: EntityRef, credential_token: str, grantee: EntityRef) -> None:
        self._get_doc(credential_token)
        if not self.check_access(caller, credential_token, Permission.OWNER):
            raise access_denied("only the owner may revoke a share")

        def op(txn: Txn) -> None:
            entries = txn.get(SHARES, credential_token) or {}
            if grantee.render() not in entries:
                raise not_found("no such sharing entry")
            del entries[grantee.render()]
            if entries:
                txn.put(SHARES, credential_token, entries)
            else:
                txn.delete(SHARES, credential_token)

        self._store.transact(op)

    def list_shares(self, caller: EntityRef, credential_token: str) -> list[dict[str, Any]]:
        self._get_doc(credential_token)
        if not self.check_access(caller, credential_token, Permission.OWNER):
            raise access_denied("only the owner may list shares")
        return self._share_docs(credential_token)

    # -- decisions --------------------------------------------------------------

    def check_access(
        self, entity: EntityRef, credential_token: str, permission: Permission
    ) -> bool:
        doc = self._store.get(CREDENTIALS, credential_token)
        if doc is None:
            raise not_found("credential not found")
        if doc["owner"] == entity.render():
            return True
        needed = permission_rank(permission)
        for entry in self._share_docs(credential_token):
            granted = permission_rank(Permission(entry["permission"]))
            if granted < needed:
                continue
            grantee = EntityRef.parse(entry["grantee"])
            if grantee == entity:
                return True
            if grantee.kind is EntityKind.GROUP and entity.kind in (
                EntityKind.USER,
                EntityKind.GROUP,
            ):
                if self._is_group_member(grantee.local_id, entity):
                    return True
        return False

    def list_accessible(self, entity: EntityRef) -> list[CredentialMetadata]:
        """Metadata (never payloads) of credentials the entity can READ."""
        out = []
        for token, doc in self._store.scan(CREDENTIALS):
            if self.check_access(entity, token, Permission.READ):
                out.append(self._metadata(doc))
        out.sort(key=lambda m: m.created_at)
        return out

    def get_metadata(self, credential_token: str) -> CredentialMetadata:
        return self._metadata(self._get_doc(credential_token))

    # -- internals ---------------------------------------------------------------

    def _seal(self, payload: bytes) -> tuple[bytes, bytes]:
        nonce = os.urandom(NONCE_BYTES)
        return nonce, self._aead.encrypt(nonce, payload, None)

    def _open(self, doc: dict[str, Any]) -> bytes:
        nonce = base64.b64decode(doc["nonce"])
        ciphertext = base64.b64decode(doc["ciphertext"])
        try:
            return self._aead.decrypt(nonce, ciphertext, None)
        except InvalidTag:
            raise internal("credential ciphertext failed integrity check") from None

    def _get_doc(self, credential_token: str) -> dict[str, Any]:
        doc = self._store.get(CREDENTIALS, credential_token)
        if doc is None:
            raise not_found("credential not found")
        return doc

    def _share_docs(self, credential_token: str) -> list[dict[str, Any]]:
        entries = self._store.get(SHARES, credential_token) or {}
        return [entries[grantee] for grantee in sorted(entries)]

    def _metadata(self, doc: dict[str, Any]) -> CredentialMetadata:
        return CredentialMetadata(
            credential_token=doc["credential_token"],
            tenant_id=doc["tenant_id"],
            owner=EntityRef.parse(doc["owner"]),
            ctype=CredentialType(doc["ctype"]),
            version=doc["version"],
            description=doc["description"],
            created_at=doc["created_at"],
            updated_at=doc["updated_at"],
        )
