"""Federated-login brokering: per-tenant IdP registrations, institution
routing, the authorization-code flow, and duplicate-account prevention.

Ships a deterministic in-process mock external IdP for tests and demos.
Local users are linked to external identities by (institution entityID,
external subject), so one person reaching the same institution through two
aliases still maps to a single local account.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from typing import Any, Callable
from urllib.parse import urlencode, urlparse

from .clock import Clock
from .errors import (
    ApiError,
    ErrorCode,
    access_denied,
    conflict,
    expired_token,
    not_found,
    validation_error,
)
from .ids import EntityRef, generate_id
from .store import RecordStore, Txn
from .tenants import TenantManager
from .tokens import TokenEngine, TokenResponse
from .users import ExternalIdentity, UserRegistry

IDP_REGISTRATIONS = "idp_registrations"  # "<tenant>:<alias>"
INSTITUTION_MAPPINGS = "institution_mappings"  # "<tenant>:<entity_id>"
AUTH_SESSIONS = "auth_sessions"  # state -> session

SESSION_TTL_S = 600
MOCK_AUTHORIZE_PATH = "/mockidp/authorize"
MOCK_TOKEN_PATH = "/mockidp/token"


@dataclass
class IdPRegistration:
    tenant_id: str
    alias: str
    authorize_endpoint: str
    token_endpoint: str
    broker_client_id: str
    broker_client_secret: str
    entity_id_param: str = "entity_id"

    def validate(self) -> None:
        if not self.alias:
            raise validation_error("alias must be non-empty")
        for uri in (self.authorize_endpoint, self.token_endpoint):
            parsed = urlparse(uri)
            if not parsed.scheme or not parsed.netloc:
                raise validation_error(f"endpoint {uri!r} must be an absolute URI")
        if not self.broker_client_id or not self.entity_id_param:
            raise validation_error("broker client id and entity parameter are required")

    def to_doc(self) -> dict[str, Any]:
        return {
            "tenant_id": self.tenant_id,
            "alias": self.alias,
            "authorize_endpoint": self.authorize_endpoint,
            "token_endpoint": self.token_endpoint,
            "broker_client_id": self.broker_client_id,
            "broker_client_secret": self.broker_client_secret,
            "entity_id_param": self.entity_id_param,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "IdPRegistration":
        return cls(
            tenant_id=doc["tenant_id"],
            alias=doc["alias"],
            authorize_endpoint=doc["authorize_endpoint"],
            token_endpoint=doc["token_endpoint"],
            broker_client_id=doc["broker_client_id"],
            broker_client_secret=doc["broker_client_secret"],
            entity_id_param=doc["entity_id_param"],
        )

    def public_doc(self) -> dict[str, Any]:
        doc = self.to_doc()
        doc.pop("broker_client_secret")
        return doc


@dataclass
class AuthorizeRedirect:
    url: str
    state: str


@dataclass
class Persona:
    username: str
    password: str
    subject: str
    email: str
    institution: str
    display_name: str = ""


# Seeded into every mock instance so demos and the scenario harness work
# against an unconfigured service; config personas may override by username.
DEFAULT_PERSONAS = [
    {
        "username": "alice",
        "password": "alice-pass",
        "subject": "alice",
        "email": "alice@inst-x.example.edu",
        "institution": "urn:inst:x",
    },
    {
        "username": "bob",
        "password": "bob-pass",
        "subject": "bob",
        "email": "bob@inst-y.example.edu",
        "institution": "urn:inst:y",
    },
]


class MockIdP:
    """Test double for an external IdP; speaks code-for-token OAuth2."""

    def __init__(self, personas: list[dict[str, str]] | None = None):
        self._personas: dict[str, Persona] = {}
        self._clients: dict[str, str] = {}
        self._codes: dict[str, dict[str, Any]] = {}
        for record in DEFAULT_PERSONAS:
            self.add_persona(Persona(**record))
        for record in personas or []:
            self.add_persona(Persona(**record))

    def add_persona(self, persona: Persona) -> None:
        self._personas[persona.username] = persona

    def personas(self) -> list[str]:
        return sorted(self._personas)

    def ensure_client(self, client_id: str, client_secret: str) -> None:
        self._clients[client_id] = client_secret

    def authorize(self, params: dict[str, str]) -> dict[str, str] | None:
        """Returns a code once the user authenticates; None = show login page."""
        client_id = params.get("client_id", "")
        if client_id not in self._clients:
            raise access_denied("unknown broker client")
        if "username" not in params and "password" not in params:
            return None
        persona = self._personas.get(params.get("username", ""))
        if persona is None or persona.password != params.get("password", ""):
            raise access_denied("unknown persona or wrong password")
        code = "mock-" + secrets.token_urlsafe(16)
        self._codes[code] = {"username": persona.username, "client_id": client_id}
        return {"code": code}

    def token(self, code: str, client_id: str, client_secret: str) -> dict[str, Any]:
        if self._clients.get(client_id) != client_secret or client_secret == "":
            raise access_denied("wrong broker credentials")
        issued = self._codes.pop(code, None)
        if issued is None or issued["client_id"] != client_id:
            raise access_denied("unknown or consumed code")
        persona = self._personas[issued["username"]]
        return {
            "access_token": "mock-access-" + secrets.token_urlsafe(8),
            "id_token": {
                "sub": persona.subject,
                "email": persona.email,
                "institution": persona.institution,
                "name": persona.display_name or persona.username,
            },
        }


ExchangeFn = Callable[[IdPRegistration, str], dict[str, Any]]


class IdPBroker:
    def __init__(
        self,
        store: RecordStore,
        clock: Clock,
        tenants: TenantManager,
        users: UserRegistry,
        tokens: TokenEngine,
        mock_idp: MockIdP | None = None,
        roles_for: Callable[[EntityRef], list[str]] | None = None,
        exchange: ExchangeFn | None = None,
    ):
        self._store = store
        self._clock = clock
        self._tenants = tenants
        self._users = users
        self._tokens = tokens
        self._mock = mock_idp
        self._roles_for = roles_for or (lambda _ref: [])
        self._exchange_override = exchange

    # -- registration -------------------------------------------------------

    def register_idp(self, registration: IdPRegistration) -> None:
        registration.validate()
        key = f"{registration.tenant_id}:{registration.alias}"

        def op(txn: Txn) -> None:
            if txn.get(IDP_REGISTRATIONS, key) is not None:
                raise conflict(f"alias {registration.alias!r} already registered")
            txn.put(IDP_REGISTRATIONS, key, registration.to_doc())

        self._store.transact(op)
        if self._mock is not None and self._is_mock(registration.token_endpoint):
            self._mock.ensure_client(
                registration.broker_client_id, registration.broker_client_secret
            )

    def map_institution(self, tenant_id: str, entity_id: str, alias: str) -> None:
        if not entity_id:
            raise validation_error("entity_id must be non-empty")

        def op(txn: Txn) -> None:
            if txn.get(IDP_REGISTRATIONS, f"{tenant_id}:{alias}") is None:
                raise not_found(f"alias {alias!r} is not registered")
            txn.put(
                INSTITUTION_MAPPINGS,
                f"{tenant_id}:{entity_id}",
                {"tenant_id": tenant_id, "entity_id": entity_id, "alias": alias},
            )

        self._store.transact(op)

    def list_idps(self, tenant_id: str) -> list[IdPRegistration]:
        prefix = f"{tenant_id}:"
        return [
            IdPRegistration.from_doc(d)
            for key, d in self._store.scan(IDP_REGISTRATIONS)
            if key.startswith(prefix)
        ]

    def list_mappings(self, tenant_id: str) -> list[dict[str, Any]]:
        prefix = f"{tenant_id}:"
        return [
            d for key, d in self._store.scan(INSTITUTION_MAPPINGS) if key.startswith(prefix)
        ]

    def resolve_alias(
        self, tenant_id: str, idp_hint: str | None, entity_id: str | None
    ) -> str:
        """Hint wins if present, else the institution mapping, else error."""
        if idp_hint:
            if self._store.get(IDP_REGISTRATIONS, f"{tenant_id}:{idp_hint}") is None:
                raise validation_error(f"unknown idp_hint {idp_hint!r}")
            return idp_hint
        if entity_id:
            mapping = self._store.get(INSTITUTION_MAPPINGS, f"{tenant_id}:{entity_id}")
            if mapping is not None:
                return mapping["alias"]
        raise validation_error("request is unroutable: no idp_hint and no institution mapping")

    # -- login flow -----------------------------------------------------------

    def begin_login(
        self,
        client_id: str,
        redirect_uri: str,
        idp_hint: str | None = None,
        entity_id: str | None = None,
        client_state: str = "",
    ) -> AuthorizeRedirect:
        tenant_id = self._tenants.tenant_for_client(client_id)
        if tenant_id is None:
            config = self._tokens.get_client(client_id)
            tenant_id = config.tenant_id if config is not None else None
        if tenant_id is None:
            raise not_found(f"client {client_id} not found")
        if not self._tenants.chain_active(tenant_id):
            raise ApiError(ErrorCode.TENANT_INACTIVE, "tenant is not active")
        profile = self._tenants.get_tenant(tenant_id).profile
        if redirect_uri not in profile.redirect_uris:
            raise access_denied(f"redirect_uri {redirect_uri!r} is not registered")
        alias = self.resolve_alias(tenant_id, idp_hint, entity_id)
        registration = self._registration(tenant_id, alias)
        state = generate_id("ses")
        now = self._clock.now()

        def op(txn: Txn) -> None:
            txn.put(
                AUTH_SESSIONS,
                state,
                {
                    "state": state,
                    "tenant_id": tenant_id,
                    "client_id": client_id,
                    "redirect_uri": redirect_uri,
                    "alias": alias,
                    "entity_id": entity_id,
                    "client_state": client_state,
                    "nonce": secrets.token_urlsafe(12),
                    "created_at": now,
                    "expires_at": now + SESSION_TTL_S,
                    "status": "PENDING",
                },
            )

        self._store.transact(op)
        params = {
            "response_type": "code",
            "client_id": registration.broker_client_id,
            "state": state,
            "redirect_uri": redirect_uri,
        }
        if entity_id:
            params[registration.entity_id_param] = entity_id
        url = f"{registration.authorize_endpoint}?{urlencode(params)}"
        return AuthorizeRedirect(url=url, state=state)

    def complete_login(
        self, state: str, authorization_code: str
    ) -> tuple[TokenResponse, str, str]:
        """Returns (tokens, user_id, client_state)."""
        now = self._clock.now()

        def consume(txn: Txn) -> dict[str, Any]:
            session = txn.get(AUTH_SESSIONS, state)
            if session is None:
                raise not_found("unknown login state")
            if session["status"] != "PENDING":
                raise conflict("login state already used")
            if now >= session["expires_at"]:
                session["status"] = "EXPIRED"
                txn.put(AUTH_SESSIONS, state, session)
                raise expired_token("login session expired")
            session["status"] = "CONSUMED"
            txn.put(AUTH_SESSIONS, state, session)
            return session

        session = self._store.transact(consume)
        if not self._tenants.chain_active(session["tenant_id"]):
            raise ApiError(ErrorCode.TENANT_INACTIVE, "tenant is not active")
        registration = self._registration(session["tenant_id"], session["alias"])
        response = self._exchange(registration, authorization_code)
        id_claims = response.get("id_token") or {}
        if not id_claims.get("sub") or not id_claims.get("institution"):
            raise access_denied("identity provider returned no usable identity")
        identity = ExternalIdentity(
            alias=session["alias"],
            external_subject=id_claims["sub"],
            email=id_claims.get("email", ""),
            institution_entity_id=id_claims["institution"],
            display_name=id_claims.get("name", ""),
        )
        tenant_id = session["tenant_id"]

        def link(txn: Txn) -> str:
            return self._users.find_or_create_linked(txn, tenant_id, identity)

        user_id = self._store.transact(link)
        if not self._users.get_user(tenant_id, user_id).enabled:
            raise access_denied("user account is disabled")
        user_ref = EntityRef.user(tenant_id, user_id)
        tokens = self._tokens.issue_user_tokens(
            tenant_id, user_ref, self._roles_for(user_ref), "authorization_code"
        )
        return tokens, user_id, session.get("client_state", "")

    # -- internals -------------------------------------------------------------

    def _registration(self, tenant_id: str, alias: str) -> IdPRegistration:
        doc = self._store.get(IDP_REGISTRATIONS, f"{tenant_id}:{alias}")
        if doc is None:
            raise not_found(f"alias {alias!r} is not registered")
        return IdPRegistration.from_doc(doc)

    def _exchange(self, registration: IdPRegistration, code: str) -> dict[str, Any]:
        if self._exchange_override is not None:
            return self._exchange_override(registration, code)
        if self._mock is not None and self._is_mock(registration.token_endpoint):
            return self._mock.token(
                code, registration.broker_client_id, registration.broker_client_secret
            )
        return self._exchange_http(registration, code)

    @staticmethod
    def _is_mock(endpoint: str) -> bool:
        return urlparse(endpoint).path == MOCK_TOKEN_PATH

    @staticmethod
    def _exchange_http(registration: IdPRegistration, code: str) -> dict[str, Any]:
        import httpx

        response = httpx.post(
            registration.token_endpoint,
            data={
                "grant_type": "authorization_code",
                "code": code,
                "client_id": registration.broker_client_id,
                "client_secret": registration.broker_client_secret,
            },
            timeout=10.0,
        )
        if response.status_code != 200:
            raise access_denied("identity provider rejected the authorization code")
        return response.json()
