"""Opaque identifiers and entity references.

Every id is ``<prefix>-<body>`` where the body is a 26-character lowercase
base32 rendering of 128 random bits. Prefixes are registered up front so a
stray tag is caught at the call site rather than leaking into the store.
"""

from __future__ import annotations

import re
import secrets
from dataclasses import dataclass
from enum import Enum

_BASE32_ALPHABET = "abcdefghijklmnopqrstuvwxyz234567"
_BODY_LENGTH = 26
_RANDOM_BITS = 128

# One tag per entity family. "cred" doubles as the credential-token prefix.
REGISTERED_PREFIXES = frozenset(
    {
        "ten",  # tenant
        "cli",  # tenant client id (credentials)
        "occ",  # oauth client config
        "usr",  # user
        "grp",  # group
        "svc",  # service account
        "agt",  # agent
        "cred",  # resource credential token
        "jti",  # token id
        "ses",  # auth session state
        "req",  # http request id
        "txn",  # store transaction id
    }
)

_ID_RE = re.compile(r"^([a-z]+)-([a-z2-7]{26})$")


def generate_id(prefix: str) -> str:
    """Return a fresh ``<prefix>-<base32body>`` id for a registered prefix."""
    assert prefix in REGISTERED_PREFIXES, f"unregistered id prefix: {prefix!r}"
    value = secrets.randbits(_RANDOM_BITS)
    chars = []
    for _ in range(_BODY_LENGTH):
        chars.append(_BASE32_ALPHABET[value & 0x1F])
        value >>= 5
    return f"{prefix}-{''.join(reversed(chars))}"


def parse_id(rendered: str, expected_prefix: str | None = None) -> tuple[str, str]:
    """Split an id into (prefix, body), optionally enforcing the prefix.

    Raises ``ValueError`` for malformed input; callers translate to the
    taxonomy where appropriate.
    """
    m = _ID_RE.match(rendered)
    if m is None:
        raise ValueError(f"malformed id: {rendered!r}")
    prefix, body = m.group(1), m.group(2)
    if expected_prefix is not None and prefix != expected_prefix:
        raise ValueError(f"expected id prefix {expected_prefix!r}, got {prefix!r}")
    return prefix, body


def is_valid_id(rendered: str, expected_prefix: str | None = None) -> bool:
    try:
        parse_id(rendered, expected_prefix)
    except ValueError:
        return False
    return True


class EntityKind(str, Enum):
    TENANT = "TENANT"
    USER = "USER"
    GROUP = "GROUP"
    SERVICE_ACCOUNT = "SERVICE_ACCOUNT"
    AGENT = "AGENT"


# Wire form of each kind inside a rendered ref.
_KIND_TAGS = {
    EntityKind.TENANT: "tenant",
    EntityKind.USER: "user",
    EntityKind.GROUP: "group",
    EntityKind.SERVICE_ACCOUNT: "service_account",
    EntityKind.AGENT: "agent",
}
_TAG_KINDS = {v: k for k, v in _KIND_TAGS.items()}


@dataclass(frozen=True)
class EntityRef:
    """A principal or grantee: (kind, owning tenant, local id)."""

    kind: EntityKind
    tenant_id: str
    local_id: str

    def __post_init__(self) -> None:
        if self.kind == EntityKind.TENANT and self.local_id != self.tenant_id:
            raise ValueError("TENANT refs must have local_id == tenant_id")

    def render(self) -> str:
        return f"{_KIND_TAGS[self.kind]}:{self.tenant_id}:{self.local_id}"

    @classmethod
    def parse(cls, rendered: str) -> "EntityRef":
        parts = rendered.split(":")
        if len(parts) != 3 or parts[0] not in _TAG_KINDS:
            raise ValueError(f"malformed entity ref: {rendered!r}")
        return cls(kind=_TAG_KINDS[parts[0]], tenant_id=parts[1], local_id=parts[2])

    @classmethod
    def tenant(cls, tenant_id: str) -> "EntityRef":
        return cls(EntityKind.TENANT, tenant_id, tenant_id)

    @classmethod
    def user(cls, tenant_id: str, user_id: str) -> "EntityRef":
        return cls(EntityKind.USER, tenant_id, user_id)

    @classmethod
    def group(cls, tenant_id: str, group_id: str) -> "EntityRef":
        return cls(EntityKind.GROUP, tenant_id, group_id)

    @classmethod
    def service_account(cls, tenant_id: str, account_id: str) -> "EntityRef":
        return cls(EntityKind.SERVICE_ACCOUNT, tenant_id, account_id)

    @classmethod
    def agent(cls, tenant_id: str, agent_id: str) -> "EntityRef":
        return cls(EntityKind.AGENT, tenant_id, agent_id)
