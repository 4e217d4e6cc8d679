"""HTTP facade: every operation is reachable through exactly one route.

All errors leave as `{code, message, request_id}` with a fixed code→status
mapping. Authentication is per route: tenant basic credentials for admin
calls, bearer tokens for principal calls, `X-Operator-Key` for operator
decisions. Agent tokens are confined to the single credential-fetch route.
"""

from __future__ import annotations

import base64
import binascii
import logging
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .errors import (
    ApiError,
    ErrorCode,
    HTTP_STATUS,
    access_denied,
    invalid_client,
    not_found,
    validation_error,
)
from .ids import EntityRef, generate_id
from .idp import IdPRegistration
from .service import TenetService
from .tenants import Decision, Tenant, TenantContext, TenantProfile, TenantStatus
from .tokens import ClientKind
from .users import Group, UserRecord
from .vault import (
    CredentialMetadata,
    CredentialType,
    Permission,
    decode_kv_set,
    encode_kv_set,
)

log = logging.getLogger("tenet.api")

# (method, path, operation) — consumed by the route-parity test and the docs.
ROUTE_TABLE: list[tuple[str, str, str]] = [
    ("POST", "/api/v1/tenants", "request_admin_tenant"),
    ("GET", "/api/v1/tenants", "list_tenants"),
    ("POST", "/api/v1/tenants/children", "create_child_tenant"),
    ("POST", "/api/v1/tenants/{tenant_id}/decision", "decide_tenant_request"),
    ("GET", "/api/v1/tenants/{tenant_id}", "get_tenant"),
    ("GET", "/api/v1/tenants/{tenant_id}/children", "list_children"),
    ("POST", "/api/v1/tenants/{tenant_id}/deactivate", "deactivate_tenant"),
    ("POST", "/api/v1/tenants/{tenant_id}/rotate", "rotate_credentials"),
    ("POST", "/oauth2/token", "token_grant"),
    ("GET", "/oauth2/authorize", "begin_login"),
    ("GET", "/oauth2/callback", "complete_login"),
    ("POST", "/oauth2/revoke", "revoke"),
    ("POST", "/oauth2/introspect", "introspect"),
    ("POST", "/api/v1/oauth-clients", "configure_client"),
    ("GET", "/api/v1/oauth-clients", "list_clients"),
    ("POST", "/api/v1/idps", "register_idp"),
    ("GET", "/api/v1/idps", "list_idps"),
    ("POST", "/api/v1/institution-mappings", "map_institution"),
    ("GET", "/api/v1/institution-mappings", "list_mappings"),
    ("POST", "/api/v1/users", "register_user"),
    ("GET", "/api/v1/users", "list_users"),
    ("PATCH", "/api/v1/users/{user_id}/enabled", "set_user_enabled"),
    ("POST", "/api/v1/groups", "create_group"),
    ("GET", "/api/v1/groups", "list_groups"),
    ("POST", "/api/v1/groups/{group_id}/members", "add_member"),
    ("DELETE", "/api/v1/groups/{group_id}/members/{ref}", "remove_member"),
    ("POST", "/api/v1/service-accounts", "register_service_account"),
    ("GET", "/api/v1/service-accounts", "list_service_accounts"),
    ("GET", "/api/v1/service-accounts/{account_id}", "get_service_account"),
    ("DELETE", "/api/v1/service-accounts/{account_id}", "delete_service_account"),
    ("POST", "/api/v1/agents", "register_agent"),
    ("GET", "/api/v1/agents", "list_agents"),
    ("DELETE", "/api/v1/agents/{agent_id}", "delete_agent"),
    ("POST", "/api/v1/secrets", "store_credential"),
    ("GET", "/api/v1/secrets", "list_accessible"),
    ("GET", "/api/v1/secrets/{cred}", "fetch_credential"),
    ("PUT", "/api/v1/secrets/{cred}", "update_credential"),
    ("DELETE", "/api/v1/secrets/{cred}", "delete_credential"),
    ("POST", "/api/v1/secrets/{cred}/shares", "share_credential"),
    ("GET", "/api/v1/secrets/{cred}/shares", "list_shares"),
    ("DELETE", "/api/v1/secrets/{cred}/shares/{entity}", "revoke_share"),
    ("GET", "/api/v1/audit", "audit_log"),
    ("GET", "/mockidp/authorize", "mock_idp_authorize"),
    ("POST", "/mockidp/token", "mock_idp_token"),
    ("GET", "/healthz", "health"),
]

AGENT_ALLOWED = ("GET", "/api/v1/secrets/{cred}")


def tenant_doc(tenant: Tenant) -> dict[str, Any]:
    return {
        "tenant_id": tenant.tenant_id,
        "parent_id": tenant.parent_id,
        "kind": tenant.kind.value,
        "status": tenant.status.value,
        "profile": tenant.profile.to_doc(),
        "created_at": tenant.created_at,
        "decided_at": tenant.decided_at,
    }


def user_doc(user: UserRecord) -> dict[str, Any]:
    return {
        "user_id": user.user_id,
        "tenant_id": user.tenant_id,
        "username": user.username,
        "email": user.email,
        "enabled": user.enabled,
        "attributes": dict(user.attributes),
        "external_identities": list(user.external_identities),
    }


def group_doc(group: Group) -> dict[str, Any]:
    return {
        "group_id": group.group_id,
        "tenant_id": group.tenant_id,
        "name": group.name,
        "members": [m.render() for m in group.members],
        "roles": list(group.roles),
    }


def metadata_doc(meta: CredentialMetadata) -> dict[str, Any]:
    return meta.to_doc()


def _body_str(body: dict[str, Any], key: str, required: bool = True, default: str = "") -> str:
    value = body.get(key, None)
    if value is None:
        if required:
            raise validation_error(f"field {key!r} is required")
        return default
    if not isinstance(value, str):
        raise validation_error(f"field {key!r} must be a string")
    return value


def _parse_ref(raw: str) -> EntityRef:
    try:
        return EntityRef.parse(raw)
    except ValueError as exc:
        raise validation_error(f"bad entity reference: {exc}") from None


def _parse_profile(body: dict[str, Any]) -> TenantProfile:
    redirect_uris = body.get("redirect_uris", [])
    if not isinstance(redirect_uris, list) or not all(isinstance(u, str) for u in redirect_uris):
        raise validation_error("redirect_uris must be a list of strings")
    return TenantProfile(
        name=_body_str(body, "name"),
        contact_email=_body_str(body, "contact_email"),
        redirect_uris=redirect_uris,
        description=_body_str(body, "description", required=False),
    )


def create_app(service: TenetService) -> FastAPI:
    app = FastAPI(title="tenet", docs_url=None, redoc_url=None, openapi_url=None)

    # -- plumbing ---------------------------------------------------------

    def envelope(request: Request, code: ErrorCode, message: str) -> JSONResponse:
        request_id = getattr(request.state, "request_id", None) or generate_id("req")
        return JSONResponse(
            status_code=HTTP_STATUS[code],
            content={"code": code.value, "message": message, "request_id": request_id},
            headers={"X-Request-Id": request_id},
        )

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError) -> JSONResponse:
        return envelope(request, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def handle_validation(request: Request, exc: RequestValidationError) -> JSONResponse:
        return envelope(request, ErrorCode.VALIDATION_ERROR, str(exc.errors()[:1]))

    @app.exception_handler(StarletteHTTPException)
    async def handle_http(request: Request, exc: StarletteHTTPException) -> JSONResponse:
        code = ErrorCode.NOT_FOUND if exc.status_code in (404, 405) else (
            ErrorCode.INTERNAL if exc.status_code >= 500 else ErrorCode.VALIDATION_ERROR
        )
        return envelope(request, code, str(exc.detail))

    @app.exception_handler(Exception)
    async def handle_internal(request: Request, exc: Exception) -> JSONResponse:
        log.exception("unhandled error", exc_info=exc)
        return envelope(request, ErrorCode.INTERNAL, "internal error")

    @app.middleware("http")
    async def request_context(request: Request, call_next):
        request.state.request_id = generate_id("req")
        confinement = _agent_confinement(request)
        if confinement is not None:
            return confinement
        response = await call_next(request)
        response.headers["X-Request-Id"] = request.state.request_id
        log.info(
            "%s %s -> %s [%s]",
            request.method,
            request.url.path,
            response.status_code,
            request.state.request_id,
        )
        return response

    def _agent_confinement(request: Request) -> JSONResponse | None:
        """Agents may call exactly one data operation."""
        auth = request.headers.get("authorization", "")
        if not auth.startswith("Bearer "):
            return None
        try:
            claims = service.tokens.peek(auth[len("Bearer "):])
        except ApiError:
            return None  # per-route auth reports the real error
        if claims.typ != "agent":
            return None
        path = request.url.path
        is_fetch = (
            request.method == "GET"
            and path.startswith("/api/v1/secrets/")
            and "/" not in path[len("/api/v1/secrets/"):]
        )
        if is_fetch:
            return None
        return envelope(
            request, ErrorCode.ACCESS_DENIED, "agent tokens may only fetch credentials"
        )

    # -- auth helpers -------------------------------------------------------

    def require_operator(request: Request) -> None:
        if not service.tenants.is_operator(request.headers.get("x-operator-key", "")):
            raise access_denied("operator authority required")

    def basic_credentials(request: Request) -> tuple[str, str]:
        header = request.headers.get("authorization", "")
        if not header.startswith("Basic "):
            raise invalid_client("basic authorization required")
        try:
            decoded = base64.b64decode(header[len("Basic "):]).decode("utf-8")
        except (binascii.Error, UnicodeDecodeError):
            raise invalid_client("malformed basic authorization") from None
        client_id, _, secret = decoded.partition(":")
        return client_id, secret

    def tenant_basic(request: Request) -> TenantContext:
        client_id, secret = basic_credentials(request)
        return service.tenants.authenticate_client(client_id, secret)

    def bearer_token(request: Request) -> str:
        header = request.headers.get("authorization", "")
        if not header.startswith("Bearer "):
            raise invalid_client("bearer token required")
        return header[len("Bearer "):]

    def caller_principal(request: Request) -> EntityRef:
        """Bearer access token or tenant basic credentials, as an EntityRef."""
        header = request.headers.get("authorization", "")
        if header.startswith("Basic "):
            return EntityRef.tenant(tenant_basic(request).tenant_id)
        claims = service.tokens.validate(bearer_token(request), expected_typ="access")
        return claims.subject_ref()

    async def json_body(request: Request) -> dict[str, Any]:
        try:
            body = await request.json()
        except Exception:
            raise validation_error("request body must be JSON") from None
        if not isinstance(body, dict):
            raise validation_error("request body must be a JSON object")
        return body

    # -- tenants ------------------------------------------------------------

    @app.post("/api/v1/tenants", status_code=201)
    async def request_admin_tenant(request: Request) -> dict[str, Any]:
        body = await json_body(request)
        tenant_id = service.tenants.request_admin_tenant(_parse_profile(body))
        return {"tenant_id": tenant_id, "status": TenantStatus.REQUESTED.value}

    @app.get("/api/v1/tenants")
    async def list_tenants(request: Request) -> dict[str, Any]:
        require_operator(request)
        status_raw = request.query_params.get("status")
        status = None
        if status_raw is not None:
            try:
                status = TenantStatus(status_raw)
            except ValueError:
                raise validation_error(f"unknown status {status_raw!r}") from None
        tenants = service.tenants.list_tenants(status)
        return {"tenants": [tenant_doc(t) for t in tenants]}

    @app.post("/api/v1/tenants/{tenant_id}/decision")
    async def decide_tenant_request(tenant_id: str, request: Request) -> dict[str, Any]:
        body = await json_body(request)
        raw = _body_str(body, "decision")
        try:
            decision = Decision(raw)
        except ValueError:
            raise validation_error(f"decision must be APPROVE or DENY, got {raw!r}") from None
        creds = service.tenants.decide_tenant_request(
            request.headers.get("x-operator-key", ""), tenant_id, decision
        )
        tenant = service.tenants.get_tenant(tenant_id)
        out: dict[str, Any] = {"tenant_id": tenant_id, "status": tenant.status.value}
        if creds is not None:
            out["client_id"] = creds.client_id
            out["client_secret"] = creds.client_secret
        return out

    @app.post("/api/v1/tenants/children", status_code=201)
    async def create_child_tenant(request: Request) -> dict[str, Any]:
        client_id, secret = basic_credentials(request)
        body = await json_body(request)
        tenant_id, creds = service.tenants.create_child_tenant(
            client_id, secret, _parse_profile(body)
        )
        return {
            "tenant_id": tenant_id,
            "status": TenantStatus.ACTIVE.value,
            "client_id": creds.client_id,
            "client_secret": creds.client_secret,
        }

    @app.get("/api/v1/tenants/{tenant_id}")
    async def get_tenant(tenant_id: str, request: Request) -> dict[str, Any]:
        if not service.tenants.is_operator(request.headers.get("x-operator-key", "")):
            ctx = tenant_basic(request)
            if tenant_id != ctx.tenant_id and tenant_id not in ctx.ancestor_path:
                target = service.tenants.get_tenant(tenant_id)
                if target.parent_id != ctx.tenant_id:
                    raise not_found(f"tenant {tenant_id} not found")
        return tenant_doc(service.tenants.get_tenant(tenant_id))

    @app.get("/api/v1/tenants/{tenant_id}/children")
    async def list_children(tenant_id: str, request: Request) -> dict[str, Any]:
        if not service.tenants.is_operator(request.headers.get("x-operator-key", "")):
            ctx = tenant_basic(request)
            if ctx.tenant_id != tenant_id:
                raise access_denied("callers may list only their own children")
        children = service.tenants.list_children(tenant_id)
        return {"tenants": [tenant_doc(t) for t in children]}

    @app.post("/api/v1/tenants/{tenant_id}/deactivate")
    async def deactivate_tenant(tenant_id: str, request: Request) -> dict[str, Any]:
        operator_key = request.headers.get("x-operator-key")
        if operator_key is not None and service.tenants.is_operator(operator_key):
            tenant = service.tenants.deactivate_tenant(tenant_id, operator_key=operator_key)
        else:
            client_id, secret = basic_credentials(request)
            tenant = service.tenants.deactivate_tenant(
                tenant_id, parent_client_id=client_id, parent_client_secret=secret
            )
        return tenant_doc(tenant)

    @app.post("/api/v1/tenants/{tenant_id}/rotate")
    async def rotate_credentials(tenant_id: str, request: Request) -> dict[str, Any]:
        client_id, secret = basic_credentials(request)
        creds = service.tenants.rotate_credentials(client_id, secret, tenant_id)
        return {
            "tenant_id": tenant_id,
            "client_id": creds.client_id,
            "client_secret": creds.client_secret,
        }

    # -- OAuth2 -----------------------------------------------------------------

    @app.post("/oauth2/token")
    async def token_grant(request: Request) -> dict[str, Any]:
        form = await request.form()
        grant_type = str(form.get("grant_type", ""))
        if grant_type == "client_credentials":
            if request.headers.get("authorization", "").startswith("Basic "):
                client_id, secret = basic_credentials(request)
            else:
                client_id = str(form.get("client_id", ""))
                secret = str(form.get("client_secret", ""))
            response = service.tokens.grant_client_credentials(client_id, secret)
            return response.to_doc()
        if grant_type == "refresh_token":
            token = str(form.get("refresh_token", ""))
            if not token:
                raise validation_error("refresh_token is required")
            return service.tokens.grant_refresh(token).to_doc()
        if grant_type == "authorization_code":
            code = str(form.get("code", ""))
            state = str(form.get("state", ""))
            if not code or not state:
                raise validation_error("code and state are required")
            tokens, user_id, client_state = service.idp.complete_login(state, code)
            out = tokens.to_doc()
            out["user_id"] = user_id
            out["client_state"] = client_state
            return out
        raise validation_error(f"unsupported grant_type {grant_type!r}")

    @app.get("/oauth2/authorize")
    async def begin_login(request: Request) -> dict[str, Any]:
        params = request.query_params
        client_id = params.get("client_id", "")
        redirect_uri = params.get("redirect_uri", "")
        if not client_id or not redirect_uri:
            raise validation_error("client_id and redirect_uri are required")
        redirect = service.idp.begin_login(
            client_id=client_id,
            redirect_uri=redirect_uri,
            idp_hint=params.get("idp_hint"),
            entity_id=params.get("entity_id"),
            client_state=params.get("state", ""),
        )
        return {"authorize_url": redirect.url, "state": redirect.state}

    @app.get("/oauth2/callback")
    async def complete_login(request: Request) -> dict[str, Any]:
        params = request.query_params
        state = params.get("state", "")
        code = params.get("code", "")
        if not state or not code:
            raise validation_error("state and code are required")
        tokens, user_id, client_state = service.idp.complete_login(state, code)
        out = tokens.to_doc()
        out["user_id"] = user_id
        out["client_state"] = client_state
        return out

    @app.post("/oauth2/revoke")
    async def revoke(request: Request) -> dict[str, Any]:
        form = await request.form()
        token = str(form.get("token", ""))
        if token:
            service.tokens.revoke(token)
        return {"revoked": bool(token)}

    @app.post("/oauth2/introspect")
    async def introspect(request: Request) -> dict[str, Any]:
        form = await request.form()
        return service.tokens.introspect(str(form.get("token", "")))

    # -- OAuth client configs -----------------------------------------------------

    @app.post("/api/v1/oauth-clients")
    async def configure_client(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        body = await json_body(request)
        raw_kind = _body_str(body, "kind")
        try:
            kind = ClientKind(raw_kind)
        except ValueError:
            raise validation_error(f"unknown client kind {raw_kind!r}") from None

        def lifetime(key: str) -> int | None:
            value = body.get(key)
            if value is not None and not isinstance(value, int):
                raise validation_error(f"{key} must be an integer")
            return value

        client_id = service.tokens.configure_client(
            ctx.tenant_id,
            kind,
            access_lifetime_s=lifetime("access_lifetime_s"),
            id_lifetime_s=lifetime("id_lifetime_s"),
            refresh_lifetime_s=lifetime("refresh_lifetime_s"),
        )
        return {"client_id": client_id}

    @app.get("/api/v1/oauth-clients")
    async def list_clients(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        return {"clients": [c.to_doc() for c in service.tokens.list_clients(ctx.tenant_id)]}

    # -- identity providers ----------------------------------------------------

    @app.post("/api/v1/idps", status_code=201)
    async def register_idp(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        body = await json_body(request)
        registration = IdPRegistration(
            tenant_id=ctx.tenant_id,
            alias=_body_str(body, "alias"),
            authorize_endpoint=_body_str(body, "authorize_endpoint"),
            token_endpoint=_body_str(body, "token_endpoint"),
            broker_client_id=_body_str(body, "broker_client_id"),
            broker_client_secret=_body_str(body, "broker_client_secret"),
            entity_id_param=_body_str(
                body, "entity_id_param", required=False, default="entity_id"
            ),
        )
        service.idp.register_idp(registration)
        return {"tenant_id": ctx.tenant_id, "alias": registration.alias}

    @app.get("/api/v1/idps")
    async def list_idps(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        return {"idps": [r.public_doc() for r in service.idp.list_idps(ctx.tenant_id)]}

    @app.post("/api/v1/institution-mappings", status_code=201)
    async def map_institution(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        body = await json_body(request)
        entity_id = _body_str(body, "entity_id")
        alias = _body_str(body, "alias")
        service.idp.map_institution(ctx.tenant_id, entity_id, alias)
        return {"tenant_id": ctx.tenant_id, "entity_id": entity_id, "alias": alias}

    @app.get("/api/v1/institution-mappings")
    async def list_mappings(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        return {"mappings": service.idp.list_mappings(ctx.tenant_id)}

    # -- users and groups ---------------------------------------------------------

    @app.post("/api/v1/users", status_code=201)
    async def register_user(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        body = await json_body(request)
        attributes = body.get("attributes", {})
        if not isinstance(attributes, dict):
            raise validation_error("attributes must be an object")
        user_id = service.users.register_user(
            ctx.tenant_id,
            _body_str(body, "username"),
            _body_str(body, "email"),
            {str(k): str(v) for k, v in attributes.items()},
        )
        return user_doc(service.users.get_user(ctx.tenant_id, user_id))

    @app.get("/api/v1/users")
    async def list_users(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        return {"users": [user_doc(u) for u in service.users.list_users(ctx.tenant_id)]}

    @app.patch("/api/v1/users/{user_id}/enabled")
    async def set_user_enabled(user_id: str, request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        body = await json_body(request)
        enabled = body.get("enabled")
        if not isinstance(enabled, bool):
            raise validation_error("enabled must be a boolean")
        return user_doc(service.users.set_user_enabled(ctx.tenant_id, user_id, enabled))

    @app.post("/api/v1/groups", status_code=201)
    async def create_group(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        body = await json_body(request)
        roles = body.get("roles", [])
        if not isinstance(roles, list) or not all(isinstance(r, str) for r in roles):
            raise validation_error("roles must be a list of strings")
        group_id = service.groups.create_group(ctx.tenant_id, _body_str(body, "name"), roles)
        return group_doc(service.groups.get_group(group_id))

    @app.get("/api/v1/groups")
    async def list_groups(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        return {"groups": [group_doc(g) for g in service.groups.list_groups(ctx.tenant_id)]}

    @app.post("/api/v1/groups/{group_id}/members")
    async def add_member(group_id: str, request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        body = await json_body(request)
        member = _parse_ref(_body_str(body, "member"))
        service.groups.add_member(group_id, member, tenant_id=ctx.tenant_id)
        return group_doc(service.groups.get_group(group_id))

    @app.delete("/api/v1/groups/{group_id}/members/{ref:path}")
    async def remove_member(group_id: str, ref: str, request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        service.groups.remove_member(group_id, _parse_ref(ref), tenant_id=ctx.tenant_id)
        return group_doc(service.groups.get_group(group_id))

    # -- service accounts -------------------------------------------------------

    @app.post("/api/v1/service-accounts", status_code=201)
    async def register_service_account(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        body = await json_body(request)
        roles = body.get("roles", [])
        attributes = body.get("attributes", {})
        if not isinstance(roles, list) or not all(isinstance(r, str) for r in roles):
            raise validation_error("roles must be a list of strings")
        if not isinstance(attributes, dict):
            raise validation_error("attributes must be an object")
        account_id, secret = service.service_accounts.register(
            ctx.tenant_id,
            _body_str(body, "name"),
            roles,
            {str(k): str(v) for k, v in attributes.items()},
        )
        return {"account_id": account_id, "secret": secret}

    @app.get("/api/v1/service-accounts")
    async def list_service_accounts(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        accounts = service.service_accounts.list(ctx.tenant_id)
        return {"service_accounts": [a.to_public_doc() for a in accounts]}

    @app.get("/api/v1/service-accounts/{account_id}")
    async def get_service_account(account_id: str, request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        return service.service_accounts.get(ctx.tenant_id, account_id).to_public_doc()

    @app.delete("/api/v1/service-accounts/{account_id}")
    async def delete_service_account(account_id: str, request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        service.service_accounts.delete(ctx.tenant_id, account_id)
        return {"account_id": account_id, "status": "DELETED"}

    # -- agents -------------------------------------------------------------------

    @app.post("/api/v1/agents", status_code=201)
    async def register_agent(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        agent_id, secret = service.agents.register(ctx.tenant_id)
        return {"agent_id": agent_id, "secret": secret}

    @app.get("/api/v1/agents")
    async def list_agents(request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        return {"agents": [a.to_public_doc() for a in service.agents.list(ctx.tenant_id)]}

    @app.delete("/api/v1/agents/{agent_id}")
    async def delete_agent(agent_id: str, request: Request) -> dict[str, Any]:
        ctx = tenant_basic(request)
        service.agents.delete(ctx.tenant_id, agent_id)
        return {"agent_id": agent_id, "status": "DELETED"}

    # -- secrets --------------------------------------------------------------------

    def _payload_from_body(body: dict[str, Any], ctype: CredentialType) -> bytes:
        if "payload_b64" in body:
            try:
                return base64.b64decode(_body_str(body, "payload_b64"), validate=True)
            except binascii.Error:
                raise validation_error("payload_b64 is not valid base64") from None
        if "kv" in body:
            if ctype is not CredentialType.KV_SET:
                raise validation_error("kv payloads require ctype KV_SET")
            kv = body["kv"]
            if not isinstance(kv, dict):
                raise validation_error("kv must be an object")
            return encode_kv_set({str(k): str(v) for k, v in kv.items()})
        raise validation_error("payload_b64 or kv is required")

    def _fetch_doc(result: Any) -> dict[str, Any]:
        doc = {
            "ctype": result.ctype.value,
            "payload_b64": base64.b64encode(result.payload).decode("ascii"),
            "version": result.version,
        }
        if result.ctype is CredentialType.KV_SET:
            try:
                doc["kv"] = decode_kv_set(result.payload)
            except UnicodeDecodeError:
                pass
        return doc

    @app.post("/api/v1/secrets", status_code=201)
    async def store_credential(request: Request) -> dict[str, Any]:
        caller = caller_principal(request)
        body = await json_body(request)
        raw_ctype = _body_str(body, "ctype")
        try:
            ctype = CredentialType(raw_ctype)
        except ValueError:
            raise validation_error(f"unknown credential type {raw_ctype!r}") from None
        payload = _payload_from_body(body, ctype)
        token = service.vault.store_credential(
            caller, ctype, payload, _body_str(body, "description", required=False)
        )
        return {"credential_token": token}

    @app.get("/api/v1/secrets")
    async def list_accessible(request: Request) -> dict[str, Any]:
        caller = caller_principal(request)
        return {
            "credentials": [metadata_doc(m) for m in service.vault.list_accessible(caller)]
        }

    @app.get("/api/v1/secrets/{cred}")
    async def fetch_credential(cred: str, request: Request) -> dict[str, Any]:
        header = request.headers.get("authorization", "")
        if header.startswith("Basic "):
            ctx = tenant_basic(request)
            result = service.broker.fetch_delegated(ctx, cred)
        elif header.startswith("Bearer "):
            token = bearer_token(request)
            claims = service.tokens.peek(token)
            if claims.typ == "agent":
                result = service.broker.fetch_as_agent(token, cred)
            else:
                result = service.broker.fetch_as_user(token, cred)
        else:
            raise invalid_client("authentication required")
        doc = _fetch_doc(result)
        doc["credential_token"] = cred
        return doc

    @app.put("/api/v1/secrets/{cred}")
    async def update_credential(cred: str, request: Request) -> dict[str, Any]:
        caller = caller_principal(request)
        body = await json_body(request)
        meta = service.vault.get_metadata(cred)
        payload = _payload_from_body(body, meta.ctype)
        version = service.vault.update_credential(caller, cred, payload)
        return {"credential_token": cred, "version": version}

    @app.delete("/api/v1/secrets/{cred}")
    async def delete_credential(cred: str, request: Request) -> dict[str, Any]:
        caller = caller_principal(request)
        service.vault.delete_credential(caller, cred)
        return {"credential_token": cred, "deleted": True}

    @app.post("/api/v1/secrets/{cred}/shares", status_code=201)
    async def share_credential(cred: str, request: Request) -> dict[str, Any]:
        caller = caller_principal(request)
        body = await json_body(request)
        grantee = _parse_ref(_body_str(body, "grantee"))
        raw_permission = _body_str(body, "permission")
        try:
            permission = Permission(raw_permission)
        except ValueError:
            raise validation_error(f"unknown permission {raw_permission!r}") from None
        service.vault.share_credential(caller, cred, grantee, permission)
        return {"credential_token": cred, "grantee": grantee.render()}

    @app.get("/api/v1/secrets/{cred}/shares")
    async def list_shares(cred: str, request: Request) -> dict[str, Any]:
        caller = caller_principal(request)
        return {"shares": service.vault.list_shares(caller, cred)}

    @app.delete("/api/v1/secrets/{cred}/shares/{entity:path}")
    async def revoke_share(cred: str, entity: str, request: Request) -> dict[str, Any]:
        caller = caller_principal(request)
        service.vault.revoke_share(caller, cred, _parse_ref(entity))
        return {"credential_token": cred, "revoked": entity}

    # -- misc -------------------------------------------------------------------------

    @app.get("/api/v1/audit")
    async def audit_log(request: Request) -> dict[str, Any]:
        require_operator(request)
        return {"audit": service.tenants.audit_log()}

    @app.get("/mockidp/authorize")
    async def mock_idp_authorize(request: Request) -> dict[str, Any]:
        params = {k: v for k, v in request.query_params.items()}
        issued = service.mock_idp.authorize(params)
        state = params.get("state", "")
        if issued is None:
            return {"login_page": True, "state": state, "required": ["username", "password"]}
        code = issued["code"]
        redirect_to = params.get("redirect_uri", "")
        if redirect_to:
            sep = "&" if "?" in redirect_to else "?"
            redirect_to = f"{redirect_to}{sep}code={code}&state={state}"
        return {"code": code, "state": state, "redirect_to": redirect_to}

    @app.post("/mockidp/token")
    async def mock_idp_token(request: Request) -> dict[str, Any]:
        form = await request.form()
        return service.mock_idp.token(
            str(form.get("code", "")),
            str(form.get("client_id", "")),
            str(form.get("client_secret", "")),
        )

    @app.get("/healthz")
    async def health() -> dict[str, Any]:
        return {"status": "ok"}

    return app
