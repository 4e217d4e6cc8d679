// DOM audit: across a full scripted session — approval reveal, service
// account, agent, child tenant, IdP registration, secrets browsing — no
// secret payload or client secret remains in the document after its
// one-time reveal, and every request stays inside the portal contract.

import { describe, expect, it } from 'vitest';
import { ApiClient, TenantDoc } from '../src/api.js';
import { mountApp } from '../src/app.js';
import { PORTAL_ENDPOINTS, hasRoute } from '../src/routes.js';
import { Session } from '../src/session.js';
import { MockFetch, created, freshRoot, input, click, ok, pageHtml, waitFor } from './helpers.js';

const OPERATOR_KEY = 'op-key-audit';
const TENANT_SECRET = 'tenant-client-secret-a94a8fe5cc';
const SA_SECRET = 'sa-secret-9e107d9d37';
const AGENT_SECRET = 'agent-secret-e4d909c290';
const CHILD_SECRET = 'child-secret-d3486ae9136';
const BROKER_SECRET = 'broker-secret-typed-8f14e45f';
const PAYLOAD = 'payload-sentinel-45c48cce2e'; // exists only server-side; must never be requested or shown

function tenantDoc(id: string, status: string): TenantDoc {
  return {
    tenant_id: id,
    parent_id: null,
    kind: 'ADMIN',
    status,
    profile: {
      name: 'Campus Gateway',
      contact_email: 'pi@campus.edu',
      redirect_uris: ['https://g.example.org/cb'],
      description: '',
    },
    created_at: 1700000000,
    decided_at: null,
  };
}

function backend(): MockFetch {
  const mock = new MockFetch();
  const pending = tenantDoc('ten-aud1', 'REQUESTED');

  mock.on('GET', '/api/v1/tenants', (call) =>
    ok({ tenants: call.query.status && pending.status !== call.query.status ? [] : [pending] }),
  );
  mock.on('GET', '/api/v1/audit', () => ok({ audit: [] }));
  mock.on('POST', '/api/v1/tenants/ten-aud1/decision', () => {
    pending.status = 'ACTIVE';
    return ok({ tenant_id: 'ten-aud1', status: 'ACTIVE', client_id: 'cli-aud1', client_secret: TENANT_SECRET });
  });
  mock.on('GET', '/api/v1/tenants/ten-aud1', () => ok(pending));
  mock.on('GET', '/api/v1/tenants/ten-aud1/children', () => ok({ tenants: [] }));
  mock.on('POST', '/api/v1/tenants/children', () =>
    created({ tenant_id: 'ten-child9', status: 'ACTIVE', client_id: 'cli-child9', client_secret: CHILD_SECRET }),
  );
  mock.on('GET', '/api/v1/users', () => ok({ users: [] }));
  mock.on('GET', '/api/v1/groups', () => ok({ groups: [] }));
  mock.on('GET', '/api/v1/service-accounts', () => ok({ service_accounts: [] }));
  mock.on('POST', '/api/v1/service-accounts', () => created({ account_id: 'sa-aud1', secret: SA_SECRET }));
  mock.on('GET', '/api/v1/agents', () => ok({ agents: [] }));
  mock.on('POST', '/api/v1/agents', () => created({ agent_id: 'agt-aud1', secret: AGENT_SECRET }));
  mock.on('GET', '/api/v1/idps', () => ok({ idps: [] }));
  mock.on('POST', '/api/v1/idps', () => created({ tenant_id: 'ten-aud1', alias: 'cilogon' }));
  mock.on('GET', '/api/v1/institution-mappings', () => ok({ mappings: [] }));
  mock.on('GET', '/api/v1/oauth-clients', () => ok({ clients: [] }));
  mock.on('GET', '/api/v1/secrets', () =>
    ok({
      credentials: [
        {
          credential_token: 'cred-aud1',
          tenant_id: 'ten-aud1',
          owner: 'tenant:ten-aud1:ten-aud1',
          ctype: 'PASSWORD',
          version: 1,
          description: 'hpc login',
          created_at: 1700000000,
          updated_at: 1700000000,
        },
      ],
    }),
  );
  mock.on('GET', /^\/api\/v1\/secrets\/[^/]+\/shares$/, () => ok({ shares: [] }));
  // the payload route exists on the server; the portal must never hit it
  mock.on('GET', /^\/api\/v1\/secrets\/[^/]+$/, () =>
    ok({ ctype: 'PASSWORD', payload_b64: btoa(PAYLOAD), version: 1 }),
  );
  return mock;
}

describe('DOM audit', () => {
  it('never leaves a secret in the document after its one-time reveal', async () => {
    const mock = backend();
    const root = freshRoot();
    const session = new Session();
    const client = new ApiClient('http://api.test', session, mock.fn);
    mountApp(root, client, session);

    // operator approves; credentials appear exactly once
    click('#nav-operator', root);
    input('#op-key', OPERATOR_KEY, root);
    click('#op-signin', root);
    await waitFor(() => root.querySelector('button.approve') != null, 'queue');
    click('button.approve[data-tenant="ten-aud1"]', root);
    await waitFor(() => document.querySelector('.modal-overlay') != null, 'reveal');
    expect(pageHtml()).toContain(TENANT_SECRET);
    click('.reveal-done');
    expect(pageHtml()).not.toContain(TENANT_SECRET);

    // re-render the console; the decision result is gone for good
    click('#op-refresh', root);
    await waitFor(() => root.querySelector('#op-all table') != null, 'console refresh');
    expect(pageHtml()).not.toContain(TENANT_SECRET);

    // tenant admin signs in with the revealed credentials
    click('#sign-out', root);
    click('#nav-admin', root);
    input('#tenant-id', 'ten-aud1', root);
    input('#tenant-client-id', 'cli-aud1', root);
    input('#tenant-client-secret', TENANT_SECRET, root);
    click('#tenant-signin', root);
    await waitFor(() => root.textContent?.includes('Tenant profile') === true, 'admin view');
    // the typed secret lives in session memory, not in the serialized DOM
    expect(pageHtml()).not.toContain(TENANT_SECRET);

    // one-time reveals across admin flows
    click('button.tab[data-tab="accounts"]', root);
    await waitFor(() => root.querySelector('#sa-register') != null, 'accounts tab');
    input('#sa-name', 'pipeline', root);
    click('#sa-register', root);
    await waitFor(() => document.querySelector('.modal-overlay') != null, 'sa reveal');
    expect(pageHtml()).toContain(SA_SECRET);
    click('.reveal-done');
    expect(pageHtml()).not.toContain(SA_SECRET);

    click('button.tab[data-tab="agents"]', root);
    await waitFor(() => root.querySelector('#agent-register') != null, 'agents tab');
    click('#agent-register', root);
    await waitFor(() => document.querySelector('.modal-overlay') != null, 'agent reveal');
    expect(pageHtml()).toContain(AGENT_SECRET);
    click('.reveal-done');
    expect(pageHtml()).not.toContain(AGENT_SECRET);

    click('button.tab[data-tab="children"]', root);
    await waitFor(() => root.querySelector('#child-create') != null, 'children tab');
    input('#child-name', 'Child Gateway', root);
    input('#child-email', 'child@campus.edu', root);
    input('#child-uri', 'https://child.example.org/cb', root);
    click('#child-create', root);
    await waitFor(() => document.querySelector('.modal-overlay') != null, 'child reveal');
    expect(pageHtml()).toContain(CHILD_SECRET);
    click('.reveal-done');
    expect(pageHtml()).not.toContain(CHILD_SECRET);

    // broker secret is typed in, submitted, and cleared — never rendered back
    click('button.tab[data-tab="idps"]', root);
    await waitFor(() => root.querySelector('#idp-register') != null, 'idps tab');
    input('#idp-alias', 'cilogon', root);
    input('#idp-authorize', 'https://cilogon.org/authorize', root);
    input('#idp-token', 'https://cilogon.org/oauth2/token', root);
    input('#idp-broker-id', 'broker-aud1', root);
    input('#idp-broker-secret', BROKER_SECRET, root);
    click('#idp-register', root);
    await waitFor(
      () => (root.querySelector('#idp-broker-secret') as HTMLInputElement | null)?.value === '',
      'idp form cleared',
    );
    expect(pageHtml()).not.toContain(BROKER_SECRET);

    // secrets view renders metadata only and never pulls the payload
    click('button.tab[data-tab="secrets"]', root);
    await waitFor(() => root.querySelector('.open-shares') != null, 'secrets tab');
    click('.open-shares[data-cred="cred-aud1"]', root);
    await waitFor(() => root.querySelector('#share-submit') != null, 'share panel');
    expect(pageHtml()).not.toContain(PAYLOAD);
    expect(pageHtml()).not.toContain(btoa(PAYLOAD));
    expect(
      mock.calls.filter((c) => /^\/api\/v1\/secrets\/[^/]+$/.test(c.path) && c.method === 'GET'),
    ).toEqual([]);

    // final sweep: nothing secret anywhere, all traffic inside the contract
    for (const secret of [TENANT_SECRET, SA_SECRET, AGENT_SECRET, CHILD_SECRET, BROKER_SECRET, PAYLOAD]) {
      expect(pageHtml()).not.toContain(secret);
    }
    for (const [method, template] of client.issued) {
      expect(hasRoute(PORTAL_ENDPOINTS, method, template), `${method} ${template}`).toBe(true);
    }
  });
});
