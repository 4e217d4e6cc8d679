"""Composition root: wires every subsystem onto one record store."""

from __future__ import annotations

import base64

from .agents import AgentRegistry, CredentialBroker
from .clock import Clock, SystemClock
from .config import ServiceConfig
from .errors import ApiError, ErrorCode, invalid_client
from .idp import IdPBroker, MockIdP
from .ids import EntityKind, EntityRef
from .service_accounts import ServiceAccountRegistry
from .store import RecordStore
from .tenants import TenantManager
from .tokens import ClientKind, GrantContext, TokenEngine
from .users import UserRegistry, GroupRegistry
from .vault import SecretsVault


class TenetService:
    """One control-plane instance over a single data directory."""

    def __init__(
        self,
        config: ServiceConfig,
        clock: Clock | None = None,
        fsync: bool = True,
    ):
        self.config = config
        self.clock = clock or SystemClock()
        self.store = RecordStore(config.data_dir, fsync=fsync)

        self.tokens = TokenEngine(
            self.store,
            self.clock,
            config.signing_key,
            principal_status=self._principal_status,
            tenant_chain_active=lambda tenant_id: self.tenants.chain_active(tenant_id),
        )
        self.tenants = TenantManager(
            self.store,
            self.clock,
            config.operator_key,
            on_activate=self.tokens.provision_default_clients,
        )
        self.users = UserRegistry(self.store, self.clock)
        self.groups = GroupRegistry(self.store, self.users)
        self.service_accounts = ServiceAccountRegistry(self.store, self.clock)
        self.agents = AgentRegistry(self.store, self.clock)
        self.vault = SecretsVault(
            self.store,
            self.clock,
            config.master_key,
            is_group_member=self.groups.is_member,
            grantee_exists=self._grantee_exists,
        )
        self.mock_idp = MockIdP(_load_personas(config.mock_idp_personas))
        self.idp = IdPBroker(
            self.store,
            self.clock,
            self.tenants,
            self.users,
            self.tokens,
            mock_idp=self.mock_idp,
            roles_for=self.roles_for,
        )
        self.broker = CredentialBroker(self.vault, self.tokens)

        self.tokens.register_authenticator("cli", self._grant_as_tenant)
        self.tokens.register_authenticator("svc", self._grant_as_service_account)
        self.tokens.register_authenticator("agt", self._grant_as_agent)

    def close(self) -> None:
        self.store.close()

    # -- cross-module directory callbacks ----------------------------------

    def _principal_status(self, ref: EntityRef) -> tuple[bool, bool]:
        if ref.kind is EntityKind.TENANT:
            # Liveness of the tenant itself is the chain check's verdict, so
            # a deactivated subject surfaces as TENANT_INACTIVE, not a
            # generic denial.
            try:
                self.tenants.get_tenant(ref.tenant_id)
            except ApiError:
                return False, False
            return True, True
        if ref.kind is EntityKind.USER:
            return self.users.user_status(ref.local_id)
        if ref.kind is EntityKind.SERVICE_ACCOUNT:
            return self.service_accounts.status(ref.local_id)
        if ref.kind is EntityKind.AGENT:
            return self.agents.status(ref.local_id)
        return False, False

    def _grantee_exists(self, ref: EntityRef) -> bool:
        if ref.kind is EntityKind.TENANT:
            try:
                self.tenants.get_tenant(ref.tenant_id)
            except ApiError:
                return False
            return True
        if ref.kind is EntityKind.GROUP:
            doc = self.store.get("groups", ref.local_id)
            return doc is not None and doc["tenant_id"] == ref.tenant_id
        exists, _active = self._principal_status(ref)
        return exists

    def roles_for(self, ref: EntityRef) -> list[str]:
        """Union of roles carried by groups the entity belongs to."""
        if ref.kind is EntityKind.SERVICE_ACCOUNT:
            try:
                return list(self.service_accounts.get(ref.tenant_id, ref.local_id).roles)
            except ApiError:
                return []
        roles: set[str] = set()
        if ref.kind is EntityKind.USER:
            for group in self.groups.list_groups(ref.tenant_id):
                if group.roles and self.groups.is_member(group.group_id, ref):
                    roles.update(group.roles)
        return sorted(roles)

    # -- client-credentials authenticators -----------------------------------

    def _grant_as_tenant(self, client_id: str, secret: str) -> GrantContext:
        ctx = self.tenants.authenticate_client(client_id, secret)
        return GrantContext(subject=EntityRef.tenant(ctx.tenant_id), client_kind=None)

    def _grant_as_service_account(self, client_id: str, secret: str) -> GrantContext:
        account = self.service_accounts.authenticate(client_id, secret)
        self._require_chain(account.tenant_id)
        return GrantContext(
            subject=EntityRef.service_account(account.tenant_id, account.account_id),
            roles=list(account.roles),
            client_kind=ClientKind.SERVICE_ACCOUNT,
        )

    def _grant_as_agent(self, client_id: str, secret: str) -> GrantContext:
        agent = self.agents.authenticate(client_id, secret)
        self._require_chain(agent.tenant_id)
        return GrantContext(subject=agent.ref(), client_kind=ClientKind.AGENT)

    def _require_chain(self, tenant_id: str) -> None:
        if not self.tenants.chain_active(tenant_id):
            raise ApiError(ErrorCode.TENANT_INACTIVE, "tenant is not active")

    # -- request authentication helpers (REST and CLI) -----------------------

    def authenticate_basic(self, header_value: str):
        """Decodes `Basic base64(client_id:secret)` into a TenantContext."""
        if not header_value.startswith("Basic "):
            raise invalid_client("basic authorization required")
        try:
            decoded = base64.b64decode(header_value[len("Basic "):]).decode("utf-8")
            client_id, _, secret = decoded.partition(":")
        except Exception:
            raise invalid_client("malformed basic authorization") from None
        return self.tenants.authenticate_client(client_id, secret)


def _load_personas(source: str | None) -> list[dict[str, str]] | None:
    """Personas config: a JSON array, or the path of a file holding one."""
    if not source:
        return None
    import json
    import os

    text = source
    if os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    personas = json.loads(text)
    if not isinstance(personas, list):
        raise ValueError("mock_idp_personas must be a JSON array of persona objects")
    return personas
