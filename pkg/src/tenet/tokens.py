"""Compact HMAC-signed tokens: issuance grants, validation, revocation.

Wire format is `base64url(header).base64url(claims).base64url(mac)` with
unpadded base64url, canonical JSON claims (sorted keys, compact separators),
and MAC = HMAC-SHA256 over the first two parts.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import hmac
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from .clock import Clock
from .errors import (
    ApiError,
    ErrorCode,
    access_denied,
    expired_token,
    internal,
    invalid_client,
    invalid_token,
    not_found,
    validation_error,
)
from .ids import EntityKind, EntityRef, generate_id, is_valid_id, parse_id
from .store import RecordStore, Txn, canonical_json

OAUTH_CLIENTS = "oauth_clients"
CLIENTS_BY_KIND = "oauth_clients_by_kind"  # "<tenant>:<kind>" -> {client_id}
REVOKED_JTIS = "revoked_jtis"
REFRESH_STATE = "refresh_state"

MIN_LIFETIME_S = 30
MAX_LIFETIME_S = 30 * 86400
DEFAULT_ACCESS_LIFETIME_S = 3600
DEFAULT_ID_LIFETIME_S = 3600
DEFAULT_REFRESH_LIFETIME_S = 14 * 86400

_HEADER = {"alg": "HS256", "typ": "JWT"}
TOKEN_TYPES = ("access", "id", "refresh", "agent")


class ClientKind(str, Enum):
    USER_LOGIN = "USER_LOGIN"
    SERVICE_ACCOUNT = "SERVICE_ACCOUNT"
    AGENT = "AGENT"


@dataclass
class OAuthClientConfig:
    client_id: str
    tenant_id: str
    kind: ClientKind
    access_lifetime_s: int = DEFAULT_ACCESS_LIFETIME_S
    id_lifetime_s: int = DEFAULT_ID_LIFETIME_S
    refresh_lifetime_s: int = DEFAULT_REFRESH_LIFETIME_S

    def to_doc(self) -> dict[str, Any]:
        return {
            "client_id": self.client_id,
            "tenant_id": self.tenant_id,
            "kind": self.kind.value,
            "access_lifetime_s": self.access_lifetime_s,
            "id_lifetime_s": self.id_lifetime_s,
            "refresh_lifetime_s": self.refresh_lifetime_s,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "OAuthClientConfig":
        return cls(
            client_id=doc["client_id"],
            tenant_id=doc["tenant_id"],
            kind=ClientKind(doc["kind"]),
            access_lifetime_s=doc["access_lifetime_s"],
            id_lifetime_s=doc["id_lifetime_s"],
            refresh_lifetime_s=doc["refresh_lifetime_s"],
        )


@dataclass
class TokenClaims:
    iss: str
    sub: str
    aud: str
    typ: str
    iat: int
    exp: int
    jti: str
    roles: list[str] = field(default_factory=list)
    amr: str = ""

    def subject_ref(self) -> EntityRef:
        return EntityRef.parse(self.sub)

    def tenant_id(self) -> str:
        return self.iss.split("/", 1)[1]

    def to_doc(self) -> dict[str, Any]:
        return {
            "iss": self.iss,
            "sub": self.sub,
            "aud": self.aud,
            "typ": self.typ,
            "iat": self.iat,
            "exp": self.exp,
            "jti": self.jti,
            "roles": list(self.roles),
            "amr": self.amr,
        }

    @classmethod
    def from_doc(cls, doc: Any) -> "TokenClaims":
        if not isinstance(doc, dict):
            raise invalid_token("claims must be an object")
        if not isinstance(doc.get("roles"), list):
            raise invalid_token("malformed claims")
        try:
            claims = cls(
                iss=doc["iss"],
                sub=doc["sub"],
                aud=doc["aud"],
                typ=doc["typ"],
                iat=doc["iat"],
                exp=doc["exp"],
                jti=doc["jti"],
                roles=list(doc["roles"]),
                amr=doc["amr"],
            )
        except (KeyError, TypeError):
            raise invalid_token("malformed claims") from None
        if not (
            isinstance(claims.iss, str)
            and claims.iss.startswith("tenet/")
            and isinstance(claims.sub, str)
            and isinstance(claims.aud, str)
            and claims.typ in TOKEN_TYPES
            and isinstance(claims.iat, int)
            and isinstance(claims.exp, int)
            and claims.exp > claims.iat
            and isinstance(claims.jti, str)
            and all(isinstance(r, str) for r in claims.roles)
            and isinstance(claims.amr, str)
        ):
            raise invalid_token("malformed claims")
        try:
            EntityRef.parse(claims.sub)
        except ValueError:
            raise invalid_token("malformed subject") from None
        return claims


@dataclass
class TokenResponse:
    access_token: str
    expires_in: int
    id_token: str | None = None
    refresh_token: str | None = None
    token_type: str = "Bearer"

    def to_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "access_token": self.access_token,
            "token_type": self.token_type,
            "expires_in": self.expires_in,
        }
        if self.id_token is not None:
            doc["id_token"] = self.id_token
        if self.refresh_token is not None:
            doc["refresh_token"] = self.refresh_token
        return doc


@dataclass
class GrantContext:
    """Authenticated principal for a client-credentials grant."""

    subject: EntityRef
    roles: list[str] = field(default_factory=list)
    client_kind: ClientKind | None = None  # None: tenant's own credentials


def b64url(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def b64url_decode(segment: str) -> bytes:
    """Strict decode: reject non-canonical encodings (padding-bit games)."""
    try:
        raw = base64.urlsafe_b64decode(segment + "=" * (-len(segment) % 4))
    except (binascii.Error, ValueError):
        raise invalid_token("bad base64url segment") from None
    if b64url(raw) != segment:
        raise invalid_token("non-canonical base64url segment")
    return raw


Authenticator = Callable[[str, str], GrantContext]
PrincipalStatus = Callable[[EntityRef], tuple[bool, bool]]
ChainCheck = Callable[[str], bool]


class TokenEngine:
    def __init__(
        self,
        store: RecordStore,
        clock: Clock,
        signing_key: bytes,
        principal_status: PrincipalStatus | None = None,
        tenant_chain_active: ChainCheck | None = None,
    ):
        if len(signing_key) < 16:
            raise ValueError("signing key too short")
        self._store = store
        self._clock = clock
        self._key = signing_key
        self._principal_status = principal_status
        self._chain_active = tenant_chain_active
        self._authenticators: dict[str, Authenticator] = {}

    def register_authenticator(self, id_prefix: str, fn: Authenticator) -> None:
        self._authenticators[id_prefix] = fn

    # -- client configuration ---------------------------------------------

    def provision_default_clients(self, txn: Txn, tenant_id: str) -> None:
        """Create one OAuth client per kind when a tenant becomes ACTIVE."""
        for kind in ClientKind:
            if txn.get(CLIENTS_BY_KIND, f"{tenant_id}:{kind.value}") is not None:
                continue
            config = OAuthClientConfig(generate_id("occ"), tenant_id, kind)
            txn.put(OAUTH_CLIENTS, config.client_id, config.to_doc())
            txn.put(
                CLIENTS_BY_KIND,
                f"{tenant_id}:{kind.value}",
                {"client_id": config.client_id},
            )

    def configure_client(
        self,
        tenant_id: str,
        kind: ClientKind,
        access_lifetime_s: int | None = None,
        id_lifetime_s: int | None = None,
        refresh_lifetime_s: int | None = None,
    ) -> str:
        """Set per-kind token lifetimes; creates the client if missing."""
        for value in (access_lifetime_s, id_lifetime_s, refresh_lifetime_s):
            if value is None:
                continue
            if not isinstance(value, int) or not MIN_LIFETIME_S <= value <= MAX_LIFETIME_S:
                raise validation_error(
                    f"lifetimes must be {MIN_LIFETIME_S}..{MAX_LIFETIME_S} s"
                )

        def op(txn: Txn) -> str:
            kind_key = f"{tenant_id}:{kind.value}"
            pointer = txn.get(CLIENTS_BY_KIND, kind_key)
            if pointer is None:
                config = OAuthClientConfig(generate_id("occ"), tenant_id, kind)
                txn.put(CLIENTS_BY_KIND, kind_key, {"client_id": config.client_id})
            else:
                config = OAuthClientConfig.from_doc(
                    txn.get(OAUTH_CLIENTS, pointer["client_id"])
                )
            if access_lifetime_s is not None:
                config.access_lifetime_s = access_lifetime_s
            if id_lifetime_s is not None:
                config.id_lifetime_s = id_lifetime_s
            if refresh_lifetime_s is not None:
                config.refresh_lifetime_s = refresh_lifetime_s
            txn.put(OAUTH_CLIENTS, config.client_id, config.to_doc())
            return config.client_id

        return self._store.transact(op)

    def client_for(self, tenant_id: str, kind: ClientKind) -> OAuthClientConfig:
        pointer = self._store.get(CLIENTS_BY_KIND, f"{tenant_id}:{kind.value}")
        if pointer is None:
            raise not_found(f"tenant {tenant_id} has no {kind.value} client")
        doc = self._store.get(OAUTH_CLIENTS, pointer["client_id"])
        assert doc is not None
        return OAuthClientConfig.from_doc(doc)

    def get_client(self, client_id: str) -> OAuthClientConfig | None:
        doc = self._store.get(OAUTH_CLIENTS, client_id)
        return None if doc is None else OAuthClientConfig.from_doc(doc)

    def list_clients(self, tenant_id: str) -> list[OAuthClientConfig]:
        configs = [
            OAuthClientConfig.from_doc(d)
            for _, d in self._store.scan(OAUTH_CLIENTS)
            if d["tenant_id"] == tenant_id
        ]
        configs.sort(key=lambda c: c.kind.value)
        return configs

    # -- signing and validation -------------------------------------------

    def sign(self, claims: TokenClaims) -> str:
        header = b64url(canonical_json(_HEADER))
        body = b64url(canonical_json(claims.to_doc()))
        signing_input = f"{header}.{body}".encode("ascii")
        mac = hmac.new(self._key, signing_input, hashlib.sha256).digest()
        return f"{header}.{body}.{b64url(mac)}"

    def peek(self, token: str) -> TokenClaims:
        """Decode and MAC-check a token without policy checks."""
        if not isinstance(token, str):
            raise invalid_token("token must be a string")
        parts = token.split(".")
        if len(parts) != 3 or not all(parts):
            raise invalid_token("token must have three parts")
        header_raw = b64url_decode(parts[0])
        body_raw = b64url_decode(parts[1])
        mac_raw = b64url_decode(parts[2])
        if header_raw != canonical_json(_HEADER):
            raise invalid_token("unsupported token header")
        signing_input = f"{parts[0]}.{parts[1]}".encode("ascii")
        expected = hmac.new(self._key, signing_input, hashlib.sha256).digest()
        if not hmac.compare_digest(mac_raw, expected):
            raise invalid_token("signature mismatch")
        try:
            doc = json.loads(body_raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise invalid_token("claims are not valid JSON") from None
        return TokenClaims.from_doc(doc)

    def validate(
        self,
        token: str,
        expected_aud: str | None = None,
        expected_typ: str | None = None,
    ) -> TokenClaims:
        claims = self.peek(token)
        now = int(self._clock.now())
        if claims.exp <= now:
            raise expired_token("token expired")
        if self._store.get(REVOKED_JTIS, claims.jti) is not None:
            raise access_denied("token revoked")
        if expected_aud is not None and claims.aud != expected_aud:
            raise access_denied("audience mismatch")
        if expected_typ is not None and claims.typ != expected_typ:
            raise access_denied("token type mismatch")
        ref = claims.subject_ref()
        if self._principal_status is not None:
            exists, active = self._principal_status(ref)
            if not exists or not active:
                raise access_denied("subject principal is not active")
        if self._chain_active is not None and not self._chain_active(claims.tenant_id()):
            raise ApiError(ErrorCode.TENANT_INACTIVE, "issuing tenant is not active")
        return claims

    # -- grants -------------------------------------------------------------

    def grant_client_credentials(self, client_id: str, client_secret: str) -> TokenResponse:
        try:
            prefix, _ = parse_id(client_id)
        except ValueError:
            raise invalid_client("unknown client") from None
        if prefix not in self._authenticators:
            raise invalid_client("unknown client")
        ctx = self._authenticators[prefix](client_id, client_secret)
        tenant_id = ctx.subject.tenant_id
        if ctx.client_kind is None:
            aud = client_id
            access_lifetime = DEFAULT_ACCESS_LIFETIME_S
            id_lifetime = DEFAULT_ID_LIFETIME_S
        else:
            client = self.client_for(tenant_id, ctx.client_kind)
            aud = client.client_id
            access_lifetime = client.access_lifetime_s
            id_lifetime = client.id_lifetime_s
        typ = "agent" if ctx.client_kind is ClientKind.AGENT else "access"
        access = self._issue(tenant_id, ctx.subject, aud, typ, access_lifetime,
                             ctx.roles, "client_credentials")
        response = TokenResponse(access_token=access, expires_in=access_lifetime)
        if ctx.client_kind is ClientKind.SERVICE_ACCOUNT:
            response.id_token = self._issue(
                tenant_id, ctx.subject, aud, "id", id_lifetime, ctx.roles,
                "client_credentials",
            )
        return response

    def issue_user_tokens(
        self, tenant_id: str, user_ref: EntityRef, roles: list[str], amr: str
    ) -> TokenResponse:
        if user_ref.kind is not EntityKind.USER:
            raise internal("user token subject must be a USER")
        client = self.client_for(tenant_id, ClientKind.USER_LOGIN)
        access = self._issue(tenant_id, user_ref, client.client_id, "access",
                             client.access_lifetime_s, roles, amr)
        id_token = self._issue(tenant_id, user_ref, client.client_id, "id",
                               client.id_lifetime_s, roles, amr)
        refresh = self._issue_refresh(tenant_id, user_ref, client, roles, amr)
        return TokenResponse(
            access_token=access,
            expires_in=client.access_lifetime_s,
            id_token=id_token,
            refresh_token=refresh,
        )

    def grant_refresh(self, refresh_token: str) -> TokenResponse:
        claims = self.validate(refresh_token, expected_typ="refresh")

        def consume(txn: Txn) -> dict[str, Any]:
            state = txn.get(REFRESH_STATE, claims.jti)
            if state is None or state["status"] != "active":
                raise access_denied("refresh token is not active")
            state["status"] = "consumed"
            txn.put(REFRESH_STATE, claims.jti, state)
            txn.put(REVOKED_JTIS, claims.jti, {"exp": claims.exp})
            return state

        self._store.transact(consume)
        return self.issue_user_tokens(
            claims.tenant_id(), claims.subject_ref(), claims.roles, "refresh_token"
        )

    # -- revocation and introspection ---------------------------------------

    def revoke(self, token_or_jti: str) -> None:
        """Idempotent; unknown or forged inputs are ignored."""
        jti = None
        exp = int(self._clock.now()) + MAX_LIFETIME_S
        if is_valid_id(token_or_jti, "jti"):
            jti = token_or_jti
        else:
            try:
                claims = self.peek(token_or_jti)
            except ApiError:
                return
            jti, exp = claims.jti, claims.exp

        def op(txn: Txn) -> None:
            txn.put(REVOKED_JTIS, jti, {"exp": exp})
            state = txn.get(REFRESH_STATE, jti)
            if state is not None and state["status"] == "active":
                state["status"] = "consumed"
                txn.put(REFRESH_STATE, jti, state)

        self._store.transact(op)

    def prune_revoked(self) -> int:
        """Drop revocation entries past their token's lifetime."""
        now = int(self._clock.now())
        stale = [k for k, doc in self._store.scan(REVOKED_JTIS) if doc["exp"] <= now]

        def op(txn: Txn) -> None:
            for key in stale:
                txn.delete(REVOKED_JTIS, key)

        if stale:
            self._store.transact(op)
        return len(stale)

    def introspect(self, token: str) -> dict[str, Any]:
        try:
            claims = self.validate(token)
        except ApiError:
            return {"active": False}
        return {"active": True, "claims": claims.to_doc()}

    # -- internals -----------------------------------------------------------

    def _issue(
        self,
        tenant_id: str,
        subject: EntityRef,
        aud: str,
        typ: str,
        lifetime_s: int,
        roles: list[str],
        amr: str,
    ) -> str:
        now = int(self._clock.now())
        claims = TokenClaims(
            iss=f"tenet/{tenant_id}",
            sub=subject.render(),
            aud=aud,
            typ=typ,
            iat=now,
            exp=now + lifetime_s,
            jti=generate_id("jti"),
            roles=list(roles),
            amr=amr,
        )
        return self.sign(claims)

    def _issue_refresh(
        self,
        tenant_id: str,
        subject: EntityRef,
        client: OAuthClientConfig,
        roles: list[str],
        amr: str,
    ) -> str:
        token = self._issue(
            tenant_id, subject, client.client_id, "refresh",
            client.refresh_lifetime_s, roles, amr,
        )
        jti = self.peek(token).jti

        def op(txn: Txn) -> None:
            txn.put(REFRESH_STATE, jti, {"status": "active", "sub": subject.render()})

        self._store.transact(op)
        return token
