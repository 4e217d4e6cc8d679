// REST endpoint contract. DOCUMENTED_ROUTES mirrors the service's published
// route table verbatim; PORTAL_ENDPOINTS is the subset the portal is allowed
// to call. ApiClient refuses to issue anything outside PORTAL_ENDPOINTS, and
// the contract tests assert PORTAL_ENDPOINTS never drifts outside the
// documented table. Payload-bearing secret routes are deliberately absent
// from the portal subset: the portal handles credential metadata only.

export type Method = 'GET' | 'POST' | 'PUT' | 'PATCH' | 'DELETE';
export type Route = readonly [Method, string];

export const DOCUMENTED_ROUTES: readonly Route[] = [
  ['POST', '/api/v1/tenants'],
  ['GET', '/api/v1/tenants'],
  ['POST', '/api/v1/tenants/children'],
  ['POST', '/api/v1/tenants/{tenant_id}/decision'],
  ['GET', '/api/v1/tenants/{tenant_id}'],
  ['GET', '/api/v1/tenants/{tenant_id}/children'],
  ['POST', '/api/v1/tenants/{tenant_id}/deactivate'],
  ['POST', '/api/v1/tenants/{tenant_id}/rotate'],
  ['POST', '/oauth2/token'],
  ['GET', '/oauth2/authorize'],
  ['GET', '/oauth2/callback'],
  ['POST', '/oauth2/revoke'],
  ['POST', '/oauth2/introspect'],
  ['POST', '/api/v1/oauth-clients'],
  ['GET', '/api/v1/oauth-clients'],
  ['POST', '/api/v1/idps'],
  ['GET', '/api/v1/idps'],
  ['POST', '/api/v1/institution-mappings'],
  ['GET', '/api/v1/institution-mappings'],
  ['POST', '/api/v1/users'],
  ['GET', '/api/v1/users'],
  ['PATCH', '/api/v1/users/{user_id}/enabled'],
  ['POST', '/api/v1/groups'],
  ['GET', '/api/v1/groups'],
  ['POST', '/api/v1/groups/{group_id}/members'],
  ['DELETE', '/api/v1/groups/{group_id}/members/{ref}'],
  ['POST', '/api/v1/service-accounts'],
  ['GET', '/api/v1/service-accounts'],
  ['GET', '/api/v1/service-accounts/{account_id}'],
  ['DELETE', '/api/v1/service-accounts/{account_id}'],
  ['POST', '/api/v1/agents'],
  ['GET', '/api/v1/agents'],
  ['DELETE', '/api/v1/agents/{agent_id}'],
  ['POST', '/api/v1/secrets'],
  ['GET', '/api/v1/secrets'],
  ['GET', '/api/v1/secrets/{cred}'],
  ['PUT', '/api/v1/secrets/{cred}'],
  ['DELETE', '/api/v1/secrets/{cred}'],
  ['POST', '/api/v1/secrets/{cred}/shares'],
  ['GET', '/api/v1/secrets/{cred}/shares'],
  ['DELETE', '/api/v1/secrets/{cred}/shares/{entity}'],
  ['GET', '/api/v1/audit'],
  ['GET', '/mockidp/authorize'],
  ['POST', '/mockidp/token'],
  ['GET', '/healthz'],
];

export const PORTAL_ENDPOINTS: readonly Route[] = [
  // requester wizard
  ['POST', '/api/v1/tenants'],
  // operator console
  ['GET', '/api/v1/tenants'],
  ['POST', '/api/v1/tenants/{tenant_id}/decision'],
  ['GET', '/api/v1/audit'],
  // tenant administration
  ['GET', '/api/v1/tenants/{tenant_id}'],
  ['POST', '/api/v1/tenants/children'],
  ['GET', '/api/v1/tenants/{tenant_id}/children'],
  ['POST', '/api/v1/oauth-clients'],
  ['GET', '/api/v1/oauth-clients'],
  ['POST', '/api/v1/idps'],
  ['GET', '/api/v1/idps'],
  ['POST', '/api/v1/institution-mappings'],
  ['GET', '/api/v1/institution-mappings'],
  ['POST', '/api/v1/users'],
  ['GET', '/api/v1/users'],
  ['PATCH', '/api/v1/users/{user_id}/enabled'],
  ['POST', '/api/v1/groups'],
  ['GET', '/api/v1/groups'],
  ['POST', '/api/v1/groups/{group_id}/members'],
  ['DELETE', '/api/v1/groups/{group_id}/members/{ref}'],
  ['POST', '/api/v1/service-accounts'],
  ['GET', '/api/v1/service-accounts'],
  ['DELETE', '/api/v1/service-accounts/{account_id}'],
  ['POST', '/api/v1/agents'],
  ['GET', '/api/v1/agents'],
  ['DELETE', '/api/v1/agents/{agent_id}'],
  // credential metadata and sharing (never payloads)
  ['GET', '/api/v1/secrets'],
  ['DELETE', '/api/v1/secrets/{cred}'],
  ['POST', '/api/v1/secrets/{cred}/shares'],
  ['GET', '/api/v1/secrets/{cred}/shares'],
  ['DELETE', '/api/v1/secrets/{cred}/shares/{entity}'],
  // liveness
  ['GET', '/healthz'],
];

export function hasRoute(table: readonly Route[], method: Method, template: string): boolean {
  return table.some(([m, t]) => m === method && t === template);
}

export function fillPath(template: string, params: Record<string, string>): string {
  return template.replace(/\{(\w+)\}/g, (_m, name: string) => {
    const value = params[name];
    if (value === undefined || value === '') throw new Error(`missing path param ${name}`);
    return encodeURIComponent(value);
  });
}
