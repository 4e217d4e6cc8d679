// End-to-end against a live control plane: wizard submission → operator
// approval → one-time credential reveal → tenant admin toggles a user,
// all through the real DOM, plus a metadata-only check on the secrets view.
// The service is spawned as a subprocess with its own temp data dir.

import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { execFileSync, spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, rmSync, writeFileSync } from 'node:fs';
import http from 'node:http';
import { createServer } from 'node:net';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { ApiClient } from '../src/api.js';
import { mountApp } from '../src/app.js';
import { PORTAL_ENDPOINTS, hasRoute } from '../src/routes.js';
import { Session } from '../src/session.js';
import { input, click, pageHtml, waitFor } from './helpers.js';

const OPERATOR_KEY = 'op-integration-key';
const PAYLOAD_SENTINEL = 'integration-payload-7f3a9c1b44';

let dir = '';
let proc: ChildProcess | null = null;
let baseUrl = '';
let serverLog = '';

// session state threaded through the sequential flow tests
let session: Session;
let client: ApiClient;
let root: HTMLElement;
let tenantId = '';
let revealedClientId = '';
let revealedSecret = '';

function nodeFetch(url: string, init: RequestInit): Promise<Response> {
  return new Promise((resolve, reject) => {
    const req = http.request(
      url,
      { method: init.method ?? 'GET', headers: (init.headers as Record<string, string>) ?? {} },
      (res) => {
        const chunks: Buffer[] = [];
        res.on('data', (chunk: Buffer) => chunks.push(chunk));
        res.on('end', () => {
          const status = res.statusCode ?? 0;
          const text = Buffer.concat(chunks).toString('utf8');
          resolve({
            ok: status >= 200 && status < 300,
            status,
            text: () => Promise.resolve(text),
          } as unknown as Response);
        });
      },
    );
    req.on('error', reject);
    if (typeof init.body === 'string') req.write(init.body);
    req.end();
  });
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.listen(0, '127.0.0.1', () => {
      const address = srv.address();
      if (address && typeof address === 'object') {
        const port = address.port;
        srv.close(() => resolve(port));
      } else {
        srv.close(() => reject(new Error('no port')));
      }
    });
  });
}

function b64key(): string {
  return execFileSync('python3', ['-c', 'import base64,os;print(base64.b64encode(os.urandom(32)).decode())'])
    .toString()
    .trim();
}

async function rawRequest(
  method: string,
  path: string,
  body: unknown,
  headers: Record<string, string>,
): Promise<{ status: number; json: any }> {
  const res = await nodeFetch(`${baseUrl}${path}`, {
    method,
    headers: { 'Content-Type': 'application/json', ...headers },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const text = await res.text();
  return { status: res.status, json: text ? JSON.parse(text) : null };
}

beforeAll(async () => {
  dir = mkdtempSync(join(tmpdir(), 'tenet-portal-it-'));
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  const config = join(dir, 'tenet.toml');
  writeFileSync(
    config,
    [
      `listen_port = ${port}`,
      `data_dir = "${join(dir, 'data')}"`,
      `master_key = "${b64key()}"`,
      `signing_key = "${b64key()}"`,
      `operator_key = "${OPERATOR_KEY}"`,
      '',
    ].join('\n'),
  );

  proc = spawn('python3', ['-m', 'tenet', 'serve', '--config', config], { stdio: ['ignore', 'pipe', 'pipe'] });
  proc.stdout?.on('data', (chunk: Buffer) => (serverLog += chunk.toString()));
  proc.stderr?.on('data', (chunk: Buffer) => (serverLog += chunk.toString()));

  const deadline = Date.now() + 60_000;
  for (;;) {
    try {
      const res = await nodeFetch(`${baseUrl}/healthz`, {});
      if (res.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error(`service did not come up:\n${serverLog}`);
    await new Promise((resolve) => setTimeout(resolve, 250));
  }

  document.body.innerHTML = '';
  root = document.createElement('div');
  document.body.append(root);
  session = new Session();
  client = new ApiClient(baseUrl, session, nodeFetch);
  mountApp(root, client, session);
});

afterAll(async () => {
  if (proc && proc.exitCode == null) {
    proc.kill('SIGTERM');
    await new Promise((resolve) => {
      const timer = setTimeout(() => {
        proc?.kill('SIGKILL');
        resolve(null);
      }, 5000);
      proc?.once('exit', () => {
        clearTimeout(timer);
        resolve(null);
      });
    });
  }
  if (dir) rmSync(dir, { recursive: true, force: true });
});

describe('live service flow', () => {
  it('wizard submits a gateway request', async () => {
    await waitFor(() => root.querySelector('#wiz-name') != null, 'wizard');
    input('#wiz-name', 'Campus Gateway', root);
    input('#wiz-email', 'pi@campus.example.edu', root);
    input('#wiz-desc', 'Integration gateway', root);
    click('#wiz-next', root);
    input('#wiz-uri', 'https://campus.example.org/cb', root);
    click('#wiz-add-uri', root);
    click('#wiz-next', root);
    click('#wiz-submit', root);
    await waitFor(() => root.querySelector('#wiz-tenant-id') != null, 'submission result', 15_000);

    tenantId = root.querySelector('#wiz-tenant-id')?.textContent ?? '';
    expect(tenantId).toMatch(/^ten-/);
    expect(root.querySelector('#wiz-result')?.textContent).toContain('REQUESTED');
  });

  it('operator approves and the credentials appear exactly once', async () => {
    click('#nav-operator', root);
    await waitFor(() => root.querySelector('#op-key') != null, 'operator sign-in');
    input('#op-key', OPERATOR_KEY, root);
    click('#op-signin', root);
    await waitFor(() => root.querySelector(`button.approve[data-tenant="${tenantId}"]`) != null, 'queue', 15_000);

    click(`button.approve[data-tenant="${tenantId}"]`, root);
    await waitFor(() => document.querySelector('.modal-overlay') != null, 'reveal modal', 15_000);

    const values = Array.from(document.querySelectorAll('.cred-value')).map((el) => el.textContent ?? '');
    expect(values.length).toBe(2);
    revealedClientId = values[0] ?? '';
    revealedSecret = values[1] ?? '';
    expect(revealedClientId).toMatch(/^cli-/);
    expect(revealedSecret.length).toBeGreaterThan(10);
    expect(pageHtml()).toContain(revealedSecret);

    click('.reveal-done');
    expect(document.querySelector('.modal-overlay')).toBeNull();
    expect(pageHtml()).not.toContain(revealedSecret);

    // the service will not hand the credentials out twice
    await expect(client.decideTenant(tenantId, 'APPROVE')).rejects.toMatchObject({ code: 'CONFLICT' });
    await waitFor(
      () => root.querySelector('#op-pending')?.textContent?.includes('No pending requests') === true,
      'queue drained',
      15_000,
    );
    expect(root.querySelector('#op-all')?.textContent).toContain('ACTIVE');
  });

  it('tenant admin signs in with the revealed credentials and toggles a user', async () => {
    click('#sign-out', root);
    click('#nav-admin', root);
    await waitFor(() => root.querySelector('#tenant-signin') != null, 'admin sign-in');
    input('#tenant-id', tenantId, root);
    input('#tenant-client-id', revealedClientId, root);
    input('#tenant-client-secret', revealedSecret, root);
    click('#tenant-signin', root);
    await waitFor(() => root.textContent?.includes('Tenant profile') === true, 'admin view', 15_000);
    expect(session.role).toBe('TENANT_ADMIN');

    click('button.tab[data-tab="users"]', root);
    await waitFor(() => root.querySelector('#user-add') != null, 'users tab', 15_000);
    input('#user-username', 'alice', root);
    input('#user-email', 'alice@campus.example.edu', root);
    click('#user-add', root);
    await waitFor(() => root.querySelector('.toggle-user') != null, 'user row', 15_000);
    expect(root.querySelector('.badge.on')?.textContent).toBe('enabled');

    click('.toggle-user', root);
    await waitFor(() => root.querySelector('.badge.off') != null, 'disabled badge', 15_000);
    expect(root.querySelector('.toggle-user')?.textContent).toBe('Enable');

    // confirm against the service through a documented read
    const { users } = await client.listUsers();
    const alice = users.find((u) => u.username === 'alice');
    expect(alice?.enabled).toBe(false);
  });

  it('secrets stay metadata-only against the live vault', async () => {
    // a gateway (not the portal) stores a credential out of band
    const stored = await rawRequest(
      'POST',
      '/api/v1/secrets',
      {
        ctype: 'PASSWORD',
        payload_b64: Buffer.from(PAYLOAD_SENTINEL).toString('base64'),
        description: 'hpc login',
      },
      { Authorization: `Basic ${Buffer.from(`${revealedClientId}:${revealedSecret}`).toString('base64')}` },
    );
    expect(stored.status).toBe(201);
    const token: string = stored.json.credential_token;

    click('button.tab[data-tab="secrets"]', root);
    await waitFor(() => root.textContent?.includes(token) === true, 'secrets table', 15_000);
    const headers = Array.from(root.querySelectorAll('table.data th')).map((th) => th.textContent?.toLowerCase());
    expect(headers).not.toContain('payload');
    expect(pageHtml()).not.toContain(PAYLOAD_SENTINEL);
    expect(pageHtml()).not.toContain(Buffer.from(PAYLOAD_SENTINEL).toString('base64'));

    // share to the real user, then revoke — against the live vault
    const { users } = await client.listUsers();
    const alice = users.find((u) => u.username === 'alice');
    const ref = `user:${tenantId}:${alice?.user_id}`;
    click(`.open-shares[data-cred="${token}"]`, root);
    await waitFor(() => root.querySelector('#share-submit') != null, 'share panel', 15_000);
    input('#share-grantee', ref, root);
    click('#share-submit', root);
    await waitFor(() => root.querySelector(`.revoke-share[data-ref="${ref}"]`) != null, 'share listed', 15_000);

    click(`.revoke-share[data-ref="${ref}"]`, root);
    await waitFor(() => root.querySelector('#shares-box')?.textContent?.includes('Not shared') === true, 'revoked', 15_000);
  });

  it('issued only documented portal endpoints and leaked nothing', () => {
    expect(client.issued.length).toBeGreaterThan(0);
    for (const [method, template] of client.issued) {
      expect(hasRoute(PORTAL_ENDPOINTS, method, template), `${method} ${template}`).toBe(true);
    }
    expect(client.issued.some(([m, t]) => m === 'GET' && t === '/api/v1/secrets/{cred}')).toBe(false);
    expect(pageHtml()).not.toContain(revealedSecret);
    expect(pageHtml()).not.toContain(PAYLOAD_SENTINEL);
  });
});
