// Application shell: role-gated navigation between the requester wizard, the
// operator console, and tenant administration. Operator keys and tenant
// credentials are verified with a real API call before the view unlocks.

import { ApiClient } from './api.js';
import { describe, h } from './dom.js';
import { mountAdmin } from './admin.js';
import { mountOperator } from './operator.js';
import { Session } from './session.js';
import { mountWizard } from './wizard.js';

type ViewName = 'requester' | 'operator' | 'admin';

export function mountApp(root: HTMLElement, client: ApiClient, session: Session): void {
  const badge = h('span', { id: 'role-badge', class: 'badge' }, session.role);
  const main = h('main', { id: 'view' });

  const header = h(
    'header',
    {},
    h('h1', {}, 'tenet portal'),
    badge,
    h(
      'nav',
      {},
      h('button', { id: 'nav-requester', 'data-view': 'requester', onclick: () => setView('requester') }, 'Request a gateway'),
      h('button', { id: 'nav-operator', 'data-view': 'operator', onclick: () => setView('operator') }, 'Operator'),
      h('button', { id: 'nav-admin', 'data-view': 'admin', onclick: () => setView('admin') }, 'Tenant admin'),
      h(
        'button',
        {
          id: 'sign-out',
          onclick: () => {
            session.signOut();
            badge.textContent = session.role;
            setView('requester');
          },
        },
        'Sign out',
      ),
    ),
  );

  root.replaceChildren(header, main);

  function setView(view: ViewName): void {
    for (const btn of Array.from(header.querySelectorAll('nav button[data-view]'))) {
      btn.classList.toggle('active', btn.getAttribute('data-view') === view);
    }
    badge.textContent = session.role;
    if (view === 'requester') {
      mountWizard(main, client);
    } else if (view === 'operator') {
      if (session.role === 'OPERATOR') mountOperator(main, client);
      else operatorSignIn();
    } else {
      if (session.role === 'TENANT_ADMIN') mountAdmin(main, client, session);
      else tenantSignIn();
    }
  }

  function signInError(box: HTMLElement, message: string): void {
    box.replaceChildren(h('p', { class: 'field-error', role: 'alert' }, message));
  }

  function operatorSignIn(): void {
    const key = h('input', { id: 'op-key', type: 'password' });
    const errors = h('div', { id: 'signin-errors' });

    async function signIn(): Promise<void> {
      session.signInOperator(key.value);
      try {
        await client.listTenants('REQUESTED');
        badge.textContent = session.role;
        mountOperator(main, client);
      } catch (err) {
        session.signOut();
        badge.textContent = session.role;
        signInError(errors, `operator key rejected: ${describe(err)}`);
      }
    }

    main.replaceChildren(
      h('h2', {}, 'Operator sign-in'),
      h('div', { class: 'form-row' }, h('label', { for: 'op-key' }, 'Operator key'), key),
      errors,
      h('button', { id: 'op-signin', class: 'primary', onclick: () => void signIn() }, 'Sign in'),
    );
  }

  function tenantSignIn(): void {
    const tenantId = h('input', { id: 'tenant-id', type: 'text' });
    const clientId = h('input', { id: 'tenant-client-id', type: 'text' });
    const clientSecret = h('input', { id: 'tenant-client-secret', type: 'password' });
    const errors = h('div', { id: 'signin-errors' });

    async function signIn(): Promise<void> {
      session.signInTenant(tenantId.value.trim(), clientId.value.trim(), clientSecret.value);
      try {
        await client.getTenant(tenantId.value.trim(), 'tenant');
        badge.textContent = session.role;
        mountAdmin(main, client, session);
      } catch (err) {
        session.signOut();
        badge.textContent = session.role;
        signInError(errors, `sign-in failed: ${describe(err)}`);
      }
    }

    main.replaceChildren(
      h('h2', {}, 'Tenant admin sign-in'),
      h('div', { class: 'form-row' }, h('label', { for: 'tenant-id' }, 'Tenant id'), tenantId),
      h('div', { class: 'form-row' }, h('label', { for: 'tenant-client-id' }, 'Client id'), clientId),
      h('div', { class: 'form-row' }, h('label', { for: 'tenant-client-secret' }, 'Client secret'), clientSecret),
      errors,
      h('button', { id: 'tenant-signin', class: 'primary', onclick: () => void signIn() }, 'Sign in'),
    );
  }

  setView('requester');
}
