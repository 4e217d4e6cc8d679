"""Operator command line: service runner, admin verbs, scenario harness.

Every networked command talks to a running service over REST and prints the
JSON response. API error envelopes go to stderr and exit 1; usage mistakes
exit 2 (click's default).
"""

from __future__ import annotations

import base64
import json
import sys
from typing import Any

import click
import httpx

from . import scenarios
from .config import ServiceConfig, random_key_b64

DEFAULT_BASE_URL = "http://127.0.0.1:8600"


class CliState:
    def __init__(self, base_url: str, operator_key: str | None, client_id: str | None,
                 client_secret: str | None, token: str | None):
        self.base_url = base_url.rstrip("/")
        self.operator_key = operator_key
        self.client_id = client_id
        self.client_secret = client_secret
        self.token = token

    def request(
        self,
        method: str,
        path: str,
        *,
        json_body: dict[str, Any] | None = None,
        form: dict[str, Any] | None = None,
        params: dict[str, Any] | None = None,
        auth: str = "none",
    ) -> dict[str, Any]:
        headers: dict[str, str] = {}
        basic = None
        if auth == "operator":
            if not self.operator_key:
                raise click.UsageError("--operator-key (or TENET_OPERATOR_KEY) is required")
            headers["X-Operator-Key"] = self.operator_key
        elif auth == "basic":
            if not (self.client_id and self.client_secret):
                raise click.UsageError(
                    "--client-id/--client-secret (or TENET_CLIENT_ID/TENET_CLIENT_SECRET) are required"
                )
            basic = (self.client_id, self.client_secret)
        elif auth == "bearer":
            if not self.token:
                raise click.UsageError("--token (or TENET_TOKEN) is required")
            headers["Authorization"] = f"Bearer {self.token}"
        elif auth == "any":
            if self.token:
                headers["Authorization"] = f"Bearer {self.token}"
            elif self.client_id and self.client_secret:
                basic = (self.client_id, self.client_secret)
            else:
                raise click.UsageError("provide --token or --client-id/--client-secret")
        try:
            response = httpx.request(
                method,
                self.base_url + path,
                json=json_body,
                data=form,
                params=params,
                headers=headers,
                auth=basic,
                timeout=30.0,
            )
        except httpx.HTTPError as exc:
            click.echo(f"transport error: {exc}", err=True)
            sys.exit(1)
        if response.status_code >= 400:
            try:
                envelope = response.json()
                message = f"{envelope['code']}: {envelope['message']} [{envelope['request_id']}]"
            except Exception:
                message = f"HTTP {response.status_code}: {response.text[:200]}"
            click.echo(message, err=True)
            sys.exit(1)
        return response.json() if response.content else {}


def emit(doc: dict[str, Any]) -> None:
    click.echo(json.dumps(doc, indent=2, sort_keys=True))


@click.group()
@click.option("--base-url", envvar="TENET_BASE_URL", default=DEFAULT_BASE_URL, show_default=True)
@click.option("--operator-key", envvar="TENET_OPERATOR_KEY", default=None)
@click.option("--client-id", envvar="TENET_CLIENT_ID", default=None)
@click.option("--client-secret", envvar="TENET_CLIENT_SECRET", default=None)
@click.option("--token", envvar="TENET_TOKEN", default=None, help="Bearer access token.")
@click.pass_context
def main(ctx: click.Context, base_url: str, operator_key: str | None,
         client_id: str | None, client_secret: str | None, token: str | None) -> None:
    """Multi-tenant security control plane CLI."""
    ctx.obj = CliState(base_url, operator_key, client_id, client_secret, token)


@main.command()
@click.option("--config", "config_path", default=None, help="TOML config file.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=None, type=int, help="Override the configured listen port.")
def serve(config_path: str | None, host: str, port: int | None) -> None:
    """Run the service (config from file plus TENET_* environment)."""
    import uvicorn

    from .api import create_app
    from .service import TenetService

    config = ServiceConfig.load(config_path)
    service = TenetService(config)
    app = create_app(service)
    try:
        uvicorn.run(app, host=host, port=port if port is not None else config.listen_port)
    finally:
        service.close()


@main.command("genkey")
def genkey() -> None:
    """Print a freshly generated base64 32-byte key (config bootstrap)."""
    click.echo(random_key_b64())


# -- tenant ----------------------------------------------------------------


@main.group()
def tenant() -> None:
    """Tenant lifecycle."""


@tenant.command("request")
@click.option("--name", required=True)
@click.option("--email", required=True)
@click.option("--redirect-uri", "redirect_uris", multiple=True)
@click.option("--description", default="")
@click.pass_obj
def tenant_request(state: CliState, name: str, email: str,
                   redirect_uris: tuple[str, ...], description: str) -> None:
    emit(state.request("POST", "/api/v1/tenants", json_body={
        "name": name,
        "contact_email": email,
        "redirect_uris": list(redirect_uris),
        "description": description,
    }))


@tenant.command("approve")
@click.argument("tenant_id")
@click.option("--deny", is_flag=True, help="Record a DENY decision instead.")
@click.pass_obj
def tenant_approve(state: CliState, tenant_id: str, deny: bool) -> None:
    decision = "DENY" if deny else "APPROVE"
    emit(state.request("POST", f"/api/v1/tenants/{tenant_id}/decision",
                       json_body={"decision": decision}, auth="operator"))


@tenant.command("create-child")
@click.option("--name", required=True)
@click.option("--email", required=True)
@click.option("--redirect-uri", "redirect_uris", multiple=True)
@click.option("--description", default="")
@click.pass_obj
def tenant_create_child(state: CliState, name: str, email: str,
                        redirect_uris: tuple[str, ...], description: str) -> None:
    emit(state.request("POST", "/api/v1/tenants/children", json_body={
        "name": name,
        "contact_email": email,
        "redirect_uris": list(redirect_uris),
        "description": description,
    }, auth="basic"))


@tenant.command("deactivate")
@click.argument("tenant_id")
@click.pass_obj
def tenant_deactivate(state: CliState, tenant_id: str) -> None:
    auth = "operator" if state.operator_key else "basic"
    emit(state.request("POST", f"/api/v1/tenants/{tenant_id}/deactivate", auth=auth))


# -- idp ---------------------------------------------------------------------


@main.group()
def idp() -> None:
    """Identity provider registrations."""


@idp.command("register")
@click.option("--alias", required=True)
@click.option("--authorize-endpoint", required=True)
@click.option("--token-endpoint", required=True)
@click.option("--broker-client-id", required=True)
@click.option("--broker-client-secret", required=True)
@click.option("--entity-id-param", default="entity_id", show_default=True)
@click.pass_obj
def idp_register(state: CliState, alias: str, authorize_endpoint: str, token_endpoint: str,
                 broker_client_id: str, broker_client_secret: str, entity_id_param: str) -> None:
    emit(state.request("POST", "/api/v1/idps", json_body={
        "alias": alias,
        "authorize_endpoint": authorize_endpoint,
        "token_endpoint": token_endpoint,
        "broker_client_id": broker_client_id,
        "broker_client_secret": broker_client_secret,
        "entity_id_param": entity_id_param,
    }, auth="basic"))


@idp.command("map")
@click.option("--entity-id", required=True)
@click.option("--alias", required=True)
@click.pass_obj
def idp_map(state: CliState, entity_id: str, alias: str) -> None:
    emit(state.request("POST", "/api/v1/institution-mappings",
                       json_body={"entity_id": entity_id, "alias": alias}, auth="basic"))


# -- user ---------------------------------------------------------------------


@main.group()
def user() -> None:
    """Tenant user administration."""


@user.command("register")
@click.option("--username", required=True)
@click.option("--email", required=True)
@click.pass_obj
def user_register(state: CliState, username: str, email: str) -> None:
    emit(state.request("POST", "/api/v1/users",
                       json_body={"username": username, "email": email}, auth="basic"))


@user.command("enable")
@click.argument("user_id")
@click.pass_obj
def user_enable(state: CliState, user_id: str) -> None:
    emit(state.request("PATCH", f"/api/v1/users/{user_id}/enabled",
                       json_body={"enabled": True}, auth="basic"))


@user.command("disable")
@click.argument("user_id")
@click.pass_obj
def user_disable(state: CliState, user_id: str) -> None:
    emit(state.request("PATCH", f"/api/v1/users/{user_id}/enabled",
                       json_body={"enabled": False}, auth="basic"))


# -- group ----------------------------------------------------------------------


@main.group()
def group() -> None:
    """Group administration."""


@group.command("create")
@click.option("--name", required=True)
@click.option("--role", "roles", multiple=True)
@click.pass_obj
def group_create(state: CliState, name: str, roles: tuple[str, ...]) -> None:
    emit(state.request("POST", "/api/v1/groups",
                       json_body={"name": name, "roles": list(roles)}, auth="basic"))


@group.command("add")
@click.argument("group_id")
@click.option("--member", required=True, help="Rendered entity reference, e.g. user:<tenant>:<id>.")
@click.pass_obj
def group_add(state: CliState, group_id: str, member: str) -> None:
    emit(state.request("POST", f"/api/v1/groups/{group_id}/members",
                       json_body={"member": member}, auth="basic"))


# -- sa ---------------------------------------------------------------------------


@main.group()
def sa() -> None:
    """Service accounts."""


@sa.command("register")
@click.option("--name", required=True)
@click.option("--role", "roles", multiple=True)
@click.pass_obj
def sa_register(state: CliState, name: str, roles: tuple[str, ...]) -> None:
    emit(state.request("POST", "/api/v1/service-accounts",
                       json_body={"name": name, "roles": list(roles)}, auth="basic"))


@sa.command("delete")
@click.argument("account_id")
@click.pass_obj
def sa_delete(state: CliState, account_id: str) -> None:
    emit(state.request("DELETE", f"/api/v1/service-accounts/{account_id}", auth="basic"))


# -- agent --------------------------------------------------------------------------


@main.group()
def agent() -> None:
    """Transfer agents."""


@agent.command("register")
@click.pass_obj
def agent_register(state: CliState) -> None:
    emit(state.request("POST", "/api/v1/agents", auth="basic"))


@agent.command("delete")
@click.argument("agent_id")
@click.pass_obj
def agent_delete(state: CliState, agent_id: str) -> None:
    emit(state.request("DELETE", f"/api/v1/agents/{agent_id}", auth="basic"))


# -- secret ----------------------------------------------------------------------------


@main.group()
def secret() -> None:
    """Encrypted credential vault."""


@secret.command("store")
@click.option("--ctype", required=True,
              type=click.Choice(["SSH_KEY", "PASSWORD", "API_TOKEN", "KV_SET"]))
@click.option("--file", "payload_file", type=click.Path(exists=True, dir_okay=False),
              help="Read the payload from a file.")
@click.option("--kv", "kv_pairs", multiple=True, help="key=value entry (KV_SET only).")
@click.option("--description", default="")
@click.pass_obj
def secret_store(state: CliState, ctype: str, payload_file: str | None,
                 kv_pairs: tuple[str, ...], description: str) -> None:
    body: dict[str, Any] = {"ctype": ctype, "description": description}
    if payload_file is not None:
        with open(payload_file, "rb") as fh:
            body["payload_b64"] = base64.b64encode(fh.read()).decode("ascii")
    elif kv_pairs:
        kv = {}
        for pair in kv_pairs:
            key, sep, value = pair.partition("=")
            if not sep:
                raise click.UsageError(f"--kv expects key=value, got {pair!r}")
            kv[key] = value
        body["kv"] = kv
    else:
        raise click.UsageError("provide --file or --kv")
    emit(state.request("POST", "/api/v1/secrets", json_body=body, auth="any"))


@secret.command("fetch")
@click.argument("cred")
@click.option("--out", "out_file", type=click.Path(dir_okay=False),
              help="Write the raw payload to a file instead of printing JSON.")
@click.pass_obj
def secret_fetch(state: CliState, cred: str, out_file: str | None) -> None:
    doc = state.request("GET", f"/api/v1/secrets/{cred}", auth="any")
    if out_file is not None:
        with open(out_file, "wb") as fh:
            fh.write(base64.b64decode(doc["payload_b64"]))
        emit({"credential_token": cred, "version": doc["version"], "written": out_file})
    else:
        emit(doc)


@secret.command("share")
@click.argument("cred")
@click.option("--grantee", required=True, help="Rendered entity reference.")
@click.option("--permission", default="READ", show_default=True,
              type=click.Choice(["READ", "WRITE", "OWNER"]))
@click.pass_obj
def secret_share(state: CliState, cred: str, grantee: str, permission: str) -> None:
    emit(state.request("POST", f"/api/v1/secrets/{cred}/shares",
                       json_body={"grantee": grantee, "permission": permission}, auth="any"))


@secret.command("revoke")
@click.argument("cred")
@click.option("--grantee", required=True, help="Rendered entity reference.")
@click.pass_obj
def secret_revoke(state: CliState, cred: str, grantee: str) -> None:
    emit(state.request("DELETE", f"/api/v1/secrets/{cred}/shares/{grantee}", auth="any"))


# -- scenario --------------------------------------------------------------------------


@main.group()
def scenario() -> None:
    """End-to-end scenario harness."""


@scenario.command("list")
def scenario_list() -> None:
    for name in scenarios.SCENARIO_NAMES:
        click.echo(name)


@scenario.command("run")
@click.argument("name")
@click.option("--report", "report_path", type=click.Path(dir_okay=False),
              help="Also write the transcript to a file.")
@click.pass_obj
def scenario_run(state: CliState, name: str, report_path: str | None) -> None:
    if name not in scenarios.SCENARIO_NAMES:
        raise click.UsageError(
            f"unknown scenario {name!r}; choose from {', '.join(scenarios.SCENARIO_NAMES)}"
        )
    if not state.operator_key:
        raise click.UsageError("--operator-key (or TENET_OPERATOR_KEY) is required")
    transcript = scenarios.run_scenario(name, state.base_url, state.operator_key)
    rendered = transcript.render()
    click.echo(rendered, nl=False)
    if report_path is not None:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(rendered)
    sys.exit(0 if transcript.ok else 1)


if __name__ == "__main__":
    main()
