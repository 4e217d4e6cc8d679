import pytest
from fastapi.routing import APIRoute
from fastapi.testclient import TestClient

from tenet.api import AGENT_ALLOWED, ROUTE_TABLE, create_app
from tenet.errors import HTTP_STATUS, ErrorCode
from tenet.ids import generate_id, is_valid_id

from support import OPERATOR_KEY, basic, bearer, make_admin_tenant


def fill_params(path: str) -> str:
    ref = f"user:{generate_id('ten')}:{generate_id('usr')}"
    return (
        path.replace("{tenant_id}", generate_id("ten"))
        .replace("{user_id}", generate_id("usr"))
        .replace("{group_id}", generate_id("grp"))
        .replace("{account_id}", generate_id("svc"))
        .replace("{agent_id}", generate_id("agt"))
        .replace("{cred}", generate_id("cred"))
        .replace("{entity}", ref)
        .replace("{ref}", ref)
    )


def assert_envelope(response, code: ErrorCode):
    assert response.status_code == HTTP_STATUS[code], response.text
    doc = response.json()
    assert set(doc) == {"code", "message", "request_id"}
    assert doc["code"] == code.value
    assert is_valid_id(doc["request_id"], "req")
    assert response.headers["x-request-id"] == doc["request_id"]


# -- surface ------------------------------------------------------------------


def test_route_table_matches_mounted_routes(client):
    mounted = {
        (method, route.path.replace(":path}", "}"))
        for route in client.app.routes
        if isinstance(route, APIRoute)
        for method in route.methods
        if method != "HEAD"
    }
    declared = {(method, path) for method, path, _ in ROUTE_TABLE}
    assert mounted == declared


def test_operation_names_are_unique():
    names = [name for _, _, name in ROUTE_TABLE]
    assert len(names) == len(set(names))
    assert AGENT_ALLOWED in {(m, p) for m, p, _ in ROUTE_TABLE}


def test_health(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.headers["x-request-id"]


# -- error envelope ---------------------------------------------------------------


def test_unknown_path_is_enveloped(client):
    assert_envelope(client.get("/api/v1/nope"), ErrorCode.NOT_FOUND)


def test_wrong_method_is_enveloped(client):
    assert_envelope(client.delete("/healthz"), ErrorCode.NOT_FOUND)


def test_validation_error_envelope(client):
    response = client.post("/api/v1/tenants", json={"name": "x"})
    assert_envelope(response, ErrorCode.VALIDATION_ERROR)


def test_malformed_json_is_enveloped(client):
    response = client.post(
        "/api/v1/tenants", content=b"{not json", headers={"Content-Type": "application/json"}
    )
    assert_envelope(response, ErrorCode.VALIDATION_ERROR)


def test_operator_key_required(client):
    tenant_id = generate_id("ten")
    response = client.post(f"/api/v1/tenants/{tenant_id}/decision", json={"decision": "APPROVE"})
    assert_envelope(response, ErrorCode.ACCESS_DENIED)


def test_bad_basic_credentials(client):
    response = client.post("/api/v1/users", json={"username": "u", "email": "u@e.org"})
    assert_envelope(response, ErrorCode.INVALID_CLIENT)
    response = client.post(
        "/api/v1/users",
        json={"username": "u", "email": "u@e.org"},
        headers={"Authorization": "Basic @@not-base64@@"},
    )
    assert_envelope(response, ErrorCode.INVALID_CLIENT)


def test_garbage_bearer_token(client, service):
    response = client.get("/api/v1/secrets", headers=bearer("junk.junk.junk"))
    assert_envelope(response, ErrorCode.INVALID_TOKEN)


def test_not_found_envelope(client):
    response = client.get(
        f"/api/v1/tenants/{generate_id('ten')}", headers={"X-Operator-Key": OPERATOR_KEY}
    )
    assert_envelope(response, ErrorCode.NOT_FOUND)


def test_internal_errors_are_enveloped(service, monkeypatch):
    probe = TestClient(create_app(service), raise_server_exceptions=False)

    def boom():
        raise RuntimeError("wiring failure")

    monkeypatch.setattr(service.tenants, "audit_log", boom)
    response = probe.get("/api/v1/audit", headers={"X-Operator-Key": OPERATOR_KEY})
    assert_envelope(response, ErrorCode.INTERNAL)
    assert "wiring failure" not in response.text  # no stack details leak


def test_request_ids_are_fresh_per_request(client):
    first = client.get("/api/v1/nope").json()["request_id"]
    second = client.get("/api/v1/nope").json()["request_id"]
    assert first != second


def test_status_mapping_table():
    assert HTTP_STATUS == {
        ErrorCode.INVALID_CLIENT: 401,
        ErrorCode.INVALID_GRANT: 400,
        ErrorCode.ACCESS_DENIED: 403,
        ErrorCode.TENANT_INACTIVE: 403,
        ErrorCode.NOT_FOUND: 404,
        ErrorCode.CONFLICT: 409,
        ErrorCode.VALIDATION_ERROR: 422,
        ErrorCode.EXPIRED_TOKEN: 401,
        ErrorCode.INVALID_TOKEN: 401,
        ErrorCode.INTERNAL: 500,
    }


# -- agent confinement ----------------------------------------------------------------


@pytest.fixture
def agent_token(service, client):
    tenant_id, _ = make_admin_tenant(client, "confine")
    agent_id, secret = service.agents.register(tenant_id)
    return service.tokens.grant_client_credentials(agent_id, secret).access_token


def test_agent_confined_to_single_fetch_route(client, agent_token):
    for method, path, _name in ROUTE_TABLE:
        concrete = fill_params(path)
        response = client.request(method, concrete, headers=bearer(agent_token))
        if (method, path) == AGENT_ALLOWED:
            # Reaches the handler; the random credential does not exist.
            assert_envelope(response, ErrorCode.NOT_FOUND)
        else:
            assert_envelope(response, ErrorCode.ACCESS_DENIED)
            assert "agent tokens" in response.json()["message"]


def test_agent_confinement_covers_unknown_paths(client, agent_token):
    assert_envelope(client.get("/api/v1/anything", headers=bearer(agent_token)),
                    ErrorCode.ACCESS_DENIED)
    assert_envelope(client.get("/api/v1/secrets/x/y/z", headers=bearer(agent_token)),
                    ErrorCode.ACCESS_DENIED)


def test_non_agent_bearer_is_not_confined(client, service):
    tenant_id, creds = make_admin_tenant(client, "normal")
    grant = service.tokens.grant_client_credentials(*creds)
    response = client.get("/api/v1/secrets", headers=bearer(grant.access_token))
    assert response.status_code == 200


def test_agent_fetch_happy_path_via_rest(client, service):
    from tenet.ids import EntityRef
    from tenet.vault import CredentialType, Permission

    tenant_id, _ = make_admin_tenant(client, "agentic")
    user_id = service.users.register_user(tenant_id, "owner", "o@e.org")
    owner = EntityRef.user(tenant_id, user_id)
    cred = service.vault.store_credential(owner, CredentialType.PASSWORD, b"hunter2")
    agent_id, secret = service.agents.register(tenant_id)
    service.vault.share_credential(owner, cred, EntityRef.agent(tenant_id, agent_id), Permission.READ)
    token = service.tokens.grant_client_credentials(agent_id, secret).access_token

    response = client.get(f"/api/v1/secrets/{cred}", headers=bearer(token))
    assert response.status_code == 200
    doc = response.json()
    import base64 as b64

    assert b64.b64decode(doc["payload_b64"]) == b"hunter2"
    assert doc["ctype"] == "PASSWORD"
