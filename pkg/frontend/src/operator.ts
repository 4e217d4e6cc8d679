// Operator console: review pending gateway requests, approve or deny, and
// inspect the result. Approval reveals the issued credentials exactly once;
// a stale decision (already decided elsewhere) surfaces the CONFLICT and
// refreshes the queue.

import { ApiClient, ApiError, TenantDoc } from './api.js';
import { h, table, toast, modal, describe } from './dom.js';
import { revealOnce } from './reveal.js';

export interface OperatorView {
  refresh: () => Promise<void>;
}

function when(ts: number | null): string {
  return ts == null ? '—' : new Date(ts * 1000).toISOString();
}

export function mountOperator(root: HTMLElement, client: ApiClient): OperatorView {
  const pendingBox = h('div', { id: 'op-pending' });
  const allBox = h('div', { id: 'op-all' });
  const auditBox = h('div', { id: 'op-audit' });

  root.replaceChildren(
    h('h2', {}, 'Operator console'),
    h('div', { class: 'bar' }, h('button', { id: 'op-refresh', onclick: () => void refresh() }, 'Refresh')),
    h('section', {}, h('h3', {}, 'Pending requests'), pendingBox),
    h('section', {}, h('h3', {}, 'All tenants'), allBox),
    h('section', {}, h('h3', {}, 'Audit log'), auditBox),
  );

  async function decide(tenantId: string, decision: 'APPROVE' | 'DENY'): Promise<void> {
    try {
      const result = await client.decideTenant(tenantId, decision);
      if (decision === 'APPROVE' && result.client_id && result.client_secret) {
        revealOnce(`Gateway credentials for ${tenantId}`, [
          ['client_id', result.client_id],
          ['client_secret', result.client_secret],
        ]);
      } else {
        toast(`${tenantId} is now ${result.status}`);
      }
    } catch (err) {
      if (err instanceof ApiError && err.code === 'CONFLICT') {
        toast('request already decided elsewhere — refreshing', 'error');
      } else {
        toast(describe(err), 'error');
      }
    }
    await refresh();
  }

  function inspect(tenant: TenantDoc): void {
    const box = modal(`Tenant ${tenant.tenant_id}`);
    box.body.append(
      h(
        'dl',
        { class: 'review' },
        h('dt', {}, 'Status'),
        h('dd', {}, tenant.status),
        h('dt', {}, 'Kind'),
        h('dd', {}, tenant.kind),
        h('dt', {}, 'Parent'),
        h('dd', {}, tenant.parent_id ?? '—'),
        h('dt', {}, 'Name'),
        h('dd', {}, tenant.profile.name),
        h('dt', {}, 'Contact'),
        h('dd', {}, tenant.profile.contact_email),
        h('dt', {}, 'Redirect URIs'),
        h('dd', {}, tenant.profile.redirect_uris.join(', ') || '—'),
        h('dt', {}, 'Requested'),
        h('dd', {}, when(tenant.created_at)),
        h('dt', {}, 'Decided'),
        h('dd', {}, when(tenant.decided_at)),
      ),
      h('button', { class: 'primary', onclick: () => box.close() }, 'Close'),
    );
  }

  async function refresh(): Promise<void> {
    try {
      const [pending, all, audit] = await Promise.all([
        client.listTenants('REQUESTED'),
        client.listTenants(),
        client.auditLog(),
      ]);

      pendingBox.replaceChildren(
        pending.tenants.length === 0
          ? h('p', { class: 'empty' }, 'No pending requests.')
          : table(
              ['Tenant', 'Name', 'Contact', 'Requested', '', ''],
              pending.tenants.map((t) => [
                h('code', {}, t.tenant_id),
                t.profile.name,
                t.profile.contact_email,
                when(t.created_at),
                h(
                  'button',
                  { class: 'approve primary', 'data-tenant': t.tenant_id, onclick: () => void decide(t.tenant_id, 'APPROVE') },
                  'Approve',
                ),
                h(
                  'button',
                  { class: 'deny', 'data-tenant': t.tenant_id, onclick: () => void decide(t.tenant_id, 'DENY') },
                  'Deny',
                ),
              ]),
            ),
      );

      allBox.replaceChildren(
        table(
          ['Tenant', 'Name', 'Status', 'Kind', 'Decided', ''],
          all.tenants.map((t) => [
            h('code', {}, t.tenant_id),
            t.profile.name,
            h('span', { class: `badge status-${t.status.toLowerCase()}` }, t.status),
            t.kind,
            when(t.decided_at),
            h('button', { class: 'inspect', 'data-tenant': t.tenant_id, onclick: () => inspect(t) }, 'Inspect'),
          ]),
        ),
      );

      const entries = audit.audit.slice(-50).reverse();
      auditBox.replaceChildren(
        table(
          ['When', 'Action', 'Tenant', 'Actor', 'Outcome'],
          entries.map((e) => [when(e.ts), e.action, h('code', {}, e.tenant_id), e.actor, e.outcome]),
        ),
      );
    } catch (err) {
      toast(describe(err), 'error');
    }
  }

  void refresh();
  return { refresh };
}
