// Typed REST client. Every call funnels through ApiClient.call, which
// enforces the PORTAL_ENDPOINTS contract and records what was issued so
// tests can audit the traffic. There are intentionally no methods for
// storing, fetching, or updating secret payloads.

import { DOCUMENTED_ROUTES, PORTAL_ENDPOINTS, fillPath, hasRoute } from './routes.js';
import type { Method, Route } from './routes.js';

export interface TenantProfile {
  name: string;
  contact_email: string;
  redirect_uris: string[];
  description: string;
}

export interface TenantDoc {
  tenant_id: string;
  parent_id: string | null;
  kind: string;
  status: string;
  profile: TenantProfile;
  created_at: number;
  decided_at: number | null;
}

export interface DecisionResult {
  tenant_id: string;
  status: string;
  client_id?: string;
  client_secret?: string;
}

export interface ChildTenantResult {
  tenant_id: string;
  status: string;
  client_id: string;
  client_secret: string;
}

export interface UserDoc {
  user_id: string;
  tenant_id: string;
  username: string;
  email: string;
  enabled: boolean;
  attributes: Record<string, string>;
  external_identities: unknown[];
}

export interface GroupDoc {
  group_id: string;
  tenant_id: string;
  name: string;
  members: string[];
  roles: string[];
}

export interface ServiceAccountDoc {
  account_id: string;
  tenant_id: string;
  name: string;
  status: string;
  roles: string[];
  attributes: Record<string, string>;
  created_at: number;
}

export interface AgentDoc {
  agent_id: string;
  tenant_id: string;
  status: string;
  scopes: string[];
  created_at: number;
}

export interface OauthClientDoc {
  client_id: string;
  tenant_id: string;
  kind: string;
  access_lifetime_s: number;
  id_lifetime_s: number;
  refresh_lifetime_s: number;
}

export interface IdpDoc {
  tenant_id: string;
  alias: string;
  authorize_endpoint: string;
  token_endpoint: string;
  broker_client_id: string;
  entity_id_param: string;
}

export interface MappingDoc {
  entity_id: string;
  alias: string;
}

export interface SecretMetaDoc {
  credential_token: string;
  tenant_id: string;
  owner: string;
  ctype: string;
  version: number;
  description: string;
  created_at: number;
  updated_at: number;
}

export interface ShareDoc {
  credential_token: string;
  grantee: string;
  permission: string;
  granted_by: string;
  granted_at: number;
}

export interface AuditEntry {
  ts: number;
  actor: string;
  action: string;
  tenant_id: string;
  outcome: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export type FetchFn = (url: string, init: RequestInit) => Promise<Response>;

export interface AuthProvider {
  operatorKey(): string | null;
  tenantCreds(): { clientId: string; clientSecret: string } | null;
}

type Auth = 'none' | 'operator' | 'basic';

interface CallOpts {
  params?: Record<string, string>;
  query?: Record<string, string>;
  body?: unknown;
  auth?: Auth;
}

export class ApiClient {
  // every call issued, as [method, template]; tests audit this
  readonly issued: Route[] = [];
  private readonly baseUrl: string;

  constructor(
    baseUrl: string,
    private readonly auth: AuthProvider,
    private readonly fetchFn: FetchFn = (url, init) => fetch(url, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  private async call<T>(method: Method, template: string, opts: CallOpts = {}): Promise<T> {
    if (!hasRoute(PORTAL_ENDPOINTS, method, template) || !hasRoute(DOCUMENTED_ROUTES, method, template)) {
      throw new Error(`undocumented endpoint: ${method} ${template}`);
    }
    this.issued.push([method, template]);
    let path = fillPath(template, opts.params ?? {});
    const qs = new URLSearchParams(opts.query ?? {}).toString();
    if (qs) path += `?${qs}`;

    const headers: Record<string, string> = {};
    const auth = opts.auth ?? 'none';
    if (auth === 'operator') {
      const key = this.auth.operatorKey();
      if (!key) throw new ApiError(401, 'INVALID_CLIENT', 'operator key not set');
      headers['X-Operator-Key'] = key;
    } else if (auth === 'basic') {
      const creds = this.auth.tenantCreds();
      if (!creds) throw new ApiError(401, 'INVALID_CLIENT', 'tenant credentials not set');
      headers['Authorization'] = `Basic ${btoa(`${creds.clientId}:${creds.clientSecret}`)}`;
    }
    const init: RequestInit = { method, headers };
    if (opts.body !== undefined) {
      headers['Content-Type'] = 'application/json';
      init.body = JSON.stringify(opts.body);
    }

    const res = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const text = await res.text();
    let data: unknown = null;
    if (text) {
      try {
        data = JSON.parse(text);
      } catch {
        data = null;
      }
    }
    if (!res.ok) {
      const err = (data ?? {}) as { code?: string; message?: string };
      throw new ApiError(res.status, err.code ?? 'INTERNAL', err.message ?? `HTTP ${res.status}`);
    }
    return data as T;
  }

  // -- requester --------------------------------------------------------------

  requestTenant(profile: TenantProfile): Promise<{ tenant_id: string; status: string }> {
    return this.call('POST', '/api/v1/tenants', { body: profile });
  }

  // -- operator ---------------------------------------------------------------

  listTenants(status?: string): Promise<{ tenants: TenantDoc[] }> {
    return this.call('GET', '/api/v1/tenants', {
      auth: 'operator',
      query: status ? { status } : {},
    });
  }

  decideTenant(tenantId: string, decision: 'APPROVE' | 'DENY'): Promise<DecisionResult> {
    return this.call('POST', '/api/v1/tenants/{tenant_id}/decision', {
      params: { tenant_id: tenantId },
      auth: 'operator',
      body: { decision },
    });
  }

  auditLog(): Promise<{ audit: AuditEntry[] }> {
    return this.call('GET', '/api/v1/audit', { auth: 'operator' });
  }

  // -- tenant administration ----------------------------------------------------

  getTenant(tenantId: string, as: 'operator' | 'tenant'): Promise<TenantDoc> {
    return this.call('GET', '/api/v1/tenants/{tenant_id}', {
      params: { tenant_id: tenantId },
      auth: as === 'operator' ? 'operator' : 'basic',
    });
  }

  createChildTenant(profile: TenantProfile): Promise<ChildTenantResult> {
    return this.call('POST', '/api/v1/tenants/children', { auth: 'basic', body: profile });
  }

  listChildren(tenantId: string): Promise<{ tenants: TenantDoc[] }> {
    return this.call('GET', '/api/v1/tenants/{tenant_id}/children', {
      params: { tenant_id: tenantId },
      auth: 'basic',
    });
  }

  configureOauthClient(
    kind: string,
    lifetimes: { access_lifetime_s?: number; id_lifetime_s?: number; refresh_lifetime_s?: number },
  ): Promise<{ client_id: string }> {
    return this.call('POST', '/api/v1/oauth-clients', { auth: 'basic', body: { kind, ...lifetimes } });
  }

  listOauthClients(): Promise<{ clients: OauthClientDoc[] }> {
    return this.call('GET', '/api/v1/oauth-clients', { auth: 'basic' });
  }

  registerIdp(registration: {
    alias: string;
    authorize_endpoint: string;
    token_endpoint: string;
    broker_client_id: string;
    broker_client_secret: string;
    entity_id_param?: string;
  }): Promise<{ tenant_id: string; alias: string }> {
    return this.call('POST', '/api/v1/idps', { auth: 'basic', body: registration });
  }

  listIdps(): Promise<{ idps: IdpDoc[] }> {
    return this.call('GET', '/api/v1/idps', { auth: 'basic' });
  }

  mapInstitution(entityId: string, alias: string): Promise<MappingDoc> {
    return this.call('POST', '/api/v1/institution-mappings', {
      auth: 'basic',
      body: { entity_id: entityId, alias },
    });
  }

  listMappings(): Promise<{ mappings: MappingDoc[] }> {
    return this.call('GET', '/api/v1/institution-mappings', { auth: 'basic' });
  }

  registerUser(username: string, email: string): Promise<UserDoc> {
    return this.call('POST', '/api/v1/users', { auth: 'basic', body: { username, email } });
  }

  listUsers(): Promise<{ users: UserDoc[] }> {
    return this.call('GET', '/api/v1/users', { auth: 'basic' });
  }

  setUserEnabled(userId: string, enabled: boolean): Promise<UserDoc> {
    return this.call('PATCH', '/api/v1/users/{user_id}/enabled', {
      params: { user_id: userId },
      auth: 'basic',
      body: { enabled },
    });
  }

  createGroup(name: string, roles: string[] = []): Promise<GroupDoc> {
    return this.call('POST', '/api/v1/groups', { auth: 'basic', body: { name, roles } });
  }

  listGroups(): Promise<{ groups: GroupDoc[] }> {
    return this.call('GET', '/api/v1/groups', { auth: 'basic' });
  }

  addGroupMember(groupId: string, memberRef: string): Promise<GroupDoc> {
    return this.call('POST', '/api/v1/groups/{group_id}/members', {
      params: { group_id: groupId },
      auth: 'basic',
      body: { member: memberRef },
    });
  }

  removeGroupMember(groupId: string, memberRef: string): Promise<GroupDoc> {
    return this.call('DELETE', '/api/v1/groups/{group_id}/members/{ref}', {
      params: { group_id: groupId, ref: memberRef },
      auth: 'basic',
    });
  }

  registerServiceAccount(name: string, roles: string[] = []): Promise<{ account_id: string; secret: string }> {
    return this.call('POST', '/api/v1/service-accounts', { auth: 'basic', body: { name, roles } });
  }

  listServiceAccounts(): Promise<{ service_accounts: ServiceAccountDoc[] }> {
    return this.call('GET', '/api/v1/service-accounts', { auth: 'basic' });
  }

  deleteServiceAccount(accountId: string): Promise<{ account_id: string; status: string }> {
    return this.call('DELETE', '/api/v1/service-accounts/{account_id}', {
      params: { account_id: accountId },
      auth: 'basic',
    });
  }

  registerAgent(): Promise<{ agent_id: string; secret: string }> {
    return this.call('POST', '/api/v1/agents', { auth: 'basic', body: {} });
  }

  listAgents(): Promise<{ agents: AgentDoc[] }> {
    return this.call('GET', '/api/v1/agents', { auth: 'basic' });
  }

  deleteAgent(agentId: string): Promise<{ agent_id: string; status: string }> {
    return this.call('DELETE', '/api/v1/agents/{agent_id}', {
      params: { agent_id: agentId },
      auth: 'basic',
    });
  }

  // -- credential metadata and sharing (never payloads) ---------------------------

  listSecrets(): Promise<{ credentials: SecretMetaDoc[] }> {
    return this.call('GET', '/api/v1/secrets', { auth: 'basic' });
  }

  deleteSecret(credentialToken: string): Promise<{ credential_token: string; deleted: boolean }> {
    return this.call('DELETE', '/api/v1/secrets/{cred}', {
      params: { cred: credentialToken },
      auth: 'basic',
    });
  }

  shareSecret(
    credentialToken: string,
    grantee: string,
    permission: string,
  ): Promise<{ credential_token: string; grantee: string }> {
    return this.call('POST', '/api/v1/secrets/{cred}/shares', {
      params: { cred: credentialToken },
      auth: 'basic',
      body: { grantee, permission },
    });
  }

  listShares(credentialToken: string): Promise<{ shares: ShareDoc[] }> {
    return this.call('GET', '/api/v1/secrets/{cred}/shares', {
      params: { cred: credentialToken },
      auth: 'basic',
    });
  }

  revokeShare(credentialToken: string, granteeRef: string): Promise<{ credential_token: string; revoked: string }> {
    return this.call('DELETE', '/api/v1/secrets/{cred}/shares/{entity}', {
      params: { cred: credentialToken, entity: granteeRef },
      auth: 'basic',
    });
  }

  // -- liveness ------------------------------------------------------------------

  health(): Promise<{ status: string }> {
    return this.call('GET', '/healthz', {});
  }
}
