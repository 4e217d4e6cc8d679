// Tenant administration: everything a gateway admin can do with their Basic
// credentials. Credential listings are metadata only — the portal has no way
// to fetch or render secret payloads, and one-time secrets (service account,
// agent, child tenant) go through the same reveal-once modal the operator uses.

import { ApiClient, GroupDoc, SecretMetaDoc, UserDoc } from './api.js';
import { Child, describe, h, table, toast } from './dom.js';
import { revealOnce } from './reveal.js';
import { Session } from './session.js';
import { validEmail, validRedirectUri } from './wizard.js';

const TABS: Array<[key: string, label: string]> = [
  ['overview', 'Overview'],
  ['users', 'Users'],
  ['groups', 'Groups'],
  ['accounts', 'Service accounts'],
  ['agents', 'Agents'],
  ['idps', 'Identity providers'],
  ['clients', 'OAuth clients'],
  ['secrets', 'Secrets'],
  ['children', 'Child tenants'],
];

export interface AdminView {
  show: (tab: string) => Promise<void>;
}

function when(ts: number | null): string {
  return ts == null ? '—' : new Date(ts * 1000).toISOString();
}

function section(title: string, ...kids: Child[]): HTMLElement {
  return h('section', { class: 'panel' }, h('h3', {}, title), ...kids);
}

function formRow(label: string, input: HTMLElement): HTMLElement {
  return h('div', { class: 'form-row' }, h('label', {}, label), input);
}

export function mountAdmin(root: HTMLElement, client: ApiClient, session: Session): AdminView {
  const content = h('div', { id: 'admin-content' });
  const nav = h(
    'nav',
    { class: 'tabs' },
    ...TABS.map(([key, label]) =>
      h('button', { class: 'tab', 'data-tab': key, onclick: () => void show(key) }, label),
    ),
  );
  root.replaceChildren(h('h2', {}, `Tenant ${session.tenantId ?? ''}`), nav, content);

  async function show(tab: string): Promise<void> {
    for (const btn of Array.from(nav.querySelectorAll('button.tab'))) {
      btn.classList.toggle('active', btn.getAttribute('data-tab') === tab);
    }
    try {
      switch (tab) {
        case 'overview':
          await renderOverview();
          break;
        case 'users':
          await renderUsers();
          break;
        case 'groups':
          await renderGroups();
          break;
        case 'accounts':
          await renderAccounts();
          break;
        case 'agents':
          await renderAgents();
          break;
        case 'idps':
          await renderIdps();
          break;
        case 'clients':
          await renderClients();
          break;
        case 'secrets':
          await renderSecrets();
          break;
        case 'children':
          await renderChildren();
          break;
        default:
          content.replaceChildren(h('p', {}, `unknown tab ${tab}`));
      }
    } catch (err) {
      content.replaceChildren(h('p', { class: 'field-error', role: 'alert' }, describe(err)));
    }
  }

  // -- overview ---------------------------------------------------------------

  async function renderOverview(): Promise<void> {
    const tenant = await client.getTenant(session.tenantId ?? '', 'tenant');
    content.replaceChildren(
      section(
        'Tenant profile',
        h(
          'dl',
          { class: 'review' },
          h('dt', {}, 'Tenant id'),
          h('dd', {}, h('code', {}, tenant.tenant_id)),
          h('dt', {}, 'Status'),
          h('dd', {}, tenant.status),
          h('dt', {}, 'Name'),
          h('dd', {}, tenant.profile.name),
          h('dt', {}, 'Contact'),
          h('dd', {}, tenant.profile.contact_email),
          h('dt', {}, 'Redirect URIs'),
          h('dd', {}, tenant.profile.redirect_uris.join(', ') || '—'),
          h('dt', {}, 'Created'),
          h('dd', {}, when(tenant.created_at)),
        ),
      ),
    );
  }

  // -- users --------------------------------------------------------------------

  async function renderUsers(): Promise<void> {
    const { users } = await client.listUsers();

    async function toggle(user: UserDoc): Promise<void> {
      try {
        const updated = await client.setUserEnabled(user.user_id, !user.enabled);
        toast(`${updated.username} is now ${updated.enabled ? 'enabled' : 'disabled'}`);
      } catch (err) {
        toast(describe(err), 'error');
      }
      await show('users');
    }

    const username = h('input', { id: 'user-username', type: 'text' });
    const email = h('input', { id: 'user-email', type: 'text' });

    async function add(): Promise<void> {
      if (!username.value.trim() || !validEmail(email.value.trim())) {
        toast('username and a valid email are required', 'error');
        return;
      }
      try {
        await client.registerUser(username.value.trim(), email.value.trim());
        toast('user registered');
        await show('users');
      } catch (err) {
        toast(describe(err), 'error');
      }
    }

    content.replaceChildren(
      section(
        'Users',
        users.length === 0
          ? h('p', { class: 'empty' }, 'No users yet.')
          : table(
              ['Username', 'Email', 'Ref', 'Status', ''],
              users.map((u) => [
                u.username,
                u.email,
                h('code', {}, `user:${u.tenant_id}:${u.user_id}`),
                h('span', { class: u.enabled ? 'badge on' : 'badge off' }, u.enabled ? 'enabled' : 'disabled'),
                h(
                  'button',
                  { class: 'toggle-user', 'data-user': u.user_id, onclick: () => void toggle(u) },
                  u.enabled ? 'Disable' : 'Enable',
                ),
              ]),
            ),
      ),
      section(
        'Register user',
        formRow('Username', username),
        formRow('Email', email),
        h('button', { id: 'user-add', class: 'primary', onclick: () => void add() }, 'Add user'),
      ),
    );
  }

  // -- groups ---------------------------------------------------------------------

  async function renderGroups(): Promise<void> {
    const { groups } = await client.listGroups();

    const name = h('input', { id: 'group-name', type: 'text' });

    async function create(): Promise<void> {
      try {
        await client.createGroup(name.value.trim());
        toast('group created');
        await show('groups');
      } catch (err) {
        toast(describe(err), 'error');
      }
    }

    function groupRow(group: GroupDoc): Child[] {
      const memberInput = h('input', { class: 'member-input', 'data-group': group.group_id, type: 'text' });

      async function addMember(): Promise<void> {
        try {
          await client.addGroupMember(group.group_id, memberInput.value.trim());
          await show('groups');
        } catch (err) {
          toast(describe(err), 'error');
        }
      }

      async function removeMember(ref: string): Promise<void> {
        try {
          await client.removeGroupMember(group.group_id, ref);
          await show('groups');
        } catch (err) {
          toast(describe(err), 'error');
        }
      }

      const members = h(
        'ul',
        { class: 'members' },
        ...group.members.map((ref) =>
          h(
            'li',
            {},
            h('code', {}, ref),
            h(
              'button',
              { class: 'remove-member', 'data-ref': ref, onclick: () => void removeMember(ref) },
              'Remove',
            ),
          ),
        ),
      );

      return [
        group.name,
        h('code', {}, group.group_id),
        group.roles.join(', ') || '—',
        members,
        h(
          'div',
          { class: 'inline-form' },
          memberInput,
          h('button', { class: 'add-member', 'data-group': group.group_id, onclick: () => void addMember() }, 'Add member'),
        ),
      ];
    }

    content.replaceChildren(
      section(
        'Groups',
        groups.length === 0
          ? h('p', { class: 'empty' }, 'No groups yet.')
          : table(['Name', 'Id', 'Roles', 'Members', 'Add member'], groups.map(groupRow)),
      ),
      section(
        'Create group',
        formRow('Name', name),
        h('button', { id: 'group-create', class: 'primary', onclick: () => void create() }, 'Create group'),
      ),
    );
  }

  // -- service accounts ---------------------------------------------------------

  async function renderAccounts(): Promise<void> {
    const { service_accounts } = await client.listServiceAccounts();

    const name = h('input', { id: 'sa-name', type: 'text' });

    async function register(): Promise<void> {
      try {
        const result = await client.registerServiceAccount(name.value.trim());
        revealOnce(
          `Service account ${result.account_id}`,
          [
            ['account_id', result.account_id],
            ['secret', result.secret],
          ],
          () => void show('accounts'),
        );
      } catch (err) {
        toast(describe(err), 'error');
      }
    }

    async function remove(accountId: string): Promise<void> {
      try {
        await client.deleteServiceAccount(accountId);
        toast(`${accountId} deleted`);
      } catch (err) {
        toast(describe(err), 'error');
      }
      await show('accounts');
    }

    content.replaceChildren(
      section(
        'Service accounts',
        service_accounts.length === 0
          ? h('p', { class: 'empty' }, 'No service accounts.')
          : table(
              ['Name', 'Account', 'Status', 'Roles', 'Created', ''],
              service_accounts.map((a) => [
                a.name,
                h('code', {}, a.account_id),
                a.status,
                a.roles.join(', ') || '—',
                when(a.created_at),
                h(
                  'button',
                  { class: 'delete-account', 'data-account': a.account_id, onclick: () => void remove(a.account_id) },
                  'Delete',
                ),
              ]),
            ),
      ),
      section(
        'Register service account',
        formRow('Name', name),
        h('button', { id: 'sa-register', class: 'primary', onclick: () => void register() }, 'Register'),
      ),
    );
  }

  // -- agents ---------------------------------------------------------------------

  async function renderAgents(): Promise<void> {
    const { agents } = await client.listAgents();

    async function register(): Promise<void> {
      try {
        const result = await client.registerAgent();
        revealOnce(
          `Agent ${result.agent_id}`,
          [
            ['agent_id', result.agent_id],
            ['secret', result.secret],
          ],
          () => void show('agents'),
        );
      } catch (err) {
        toast(describe(err), 'error');
      }
    }

    async function remove(agentId: string): Promise<void> {
      try {
        await client.deleteAgent(agentId);
        toast(`${agentId} deleted`);
      } catch (err) {
        toast(describe(err), 'error');
      }
      await show('agents');
    }

    content.replaceChildren(
      section(
        'Agents',
        agents.length === 0
          ? h('p', { class: 'empty' }, 'No agents registered.')
          : table(
              ['Agent', 'Status', 'Scopes', 'Created', ''],
              agents.map((a) => [
                h('code', {}, a.agent_id),
                a.status,
                a.scopes.join(', ') || '—',
                when(a.created_at),
                h(
                  'button',
                  { class: 'delete-agent', 'data-agent': a.agent_id, onclick: () => void remove(a.agent_id) },
                  'Delete',
                ),
              ]),
            ),
      ),
      section(
        'Register agent',
        h('p', {}, 'Agents receive confined access tokens for credential retrieval.'),
        h('button', { id: 'agent-register', class: 'primary', onclick: () => void register() }, 'Register agent'),
      ),
    );
  }

  // -- identity providers -----------------------------------------------------------

  async function renderIdps(): Promise<void> {
    const [{ idps }, { mappings }] = await Promise.all([client.listIdps(), client.listMappings()]);

    const alias = h('input', { id: 'idp-alias', type: 'text' });
    const authorize = h('input', { id: 'idp-authorize', type: 'text' });
    const token = h('input', { id: 'idp-token', type: 'text' });
    const brokerId = h('input', { id: 'idp-broker-id', type: 'text' });
    const brokerSecret = h('input', { id: 'idp-broker-secret', type: 'password' });
    const entityParam = h('input', { id: 'idp-entity-param', type: 'text', value: 'entity_id' });

    async function register(): Promise<void> {
      try {
        await client.registerIdp({
          alias: alias.value.trim(),
          authorize_endpoint: authorize.value.trim(),
          token_endpoint: token.value.trim(),
          broker_client_id: brokerId.value.trim(),
          broker_client_secret: brokerSecret.value,
          entity_id_param: entityParam.value.trim() || 'entity_id',
        });
        brokerSecret.value = '';
        toast('identity provider registered');
        await show('idps');
      } catch (err) {
        toast(describe(err), 'error');
      }
    }

    const entityId = h('input', { id: 'map-entity-id', type: 'text' });
    const mapAlias = h('input', { id: 'map-alias', type: 'text' });

    async function map(): Promise<void> {
      try {
        await client.mapInstitution(entityId.value.trim(), mapAlias.value.trim());
        toast('institution mapped');
        await show('idps');
      } catch (err) {
        toast(describe(err), 'error');
      }
    }

    content.replaceChildren(
      section(
        'Identity providers',
        idps.length === 0
          ? h('p', { class: 'empty' }, 'No identity providers registered.')
          : table(
              ['Alias', 'Authorize endpoint', 'Token endpoint', 'Broker client', 'Hint param'],
              idps.map((r) => [r.alias, r.authorize_endpoint, r.token_endpoint, h('code', {}, r.broker_client_id), r.entity_id_param]),
            ),
      ),
      section(
        'Register identity provider',
        formRow('Alias', alias),
        formRow('Authorize endpoint', authorize),
        formRow('Token endpoint', token),
        formRow('Broker client id', brokerId),
        formRow('Broker client secret', brokerSecret),
        formRow('Entity-id parameter', entityParam),
        h('button', { id: 'idp-register', class: 'primary', onclick: () => void register() }, 'Register'),
      ),
      section(
        'Institution mappings',
        mappings.length === 0
          ? h('p', { class: 'empty' }, 'No mappings.')
          : table(
              ['Entity id', 'Alias'],
              mappings.map((m) => [h('code', {}, m.entity_id), m.alias]),
            ),
        formRow('Entity id', entityId),
        formRow('Alias', mapAlias),
        h('button', { id: 'map-add', onclick: () => void map() }, 'Map institution'),
      ),
    );
  }

  // -- OAuth clients ------------------------------------------------------------------

  async function renderClients(): Promise<void> {
    const { clients } = await client.listOauthClients();

    const kind = h(
      'select',
      { id: 'client-kind' },
      h('option', { value: 'USER_LOGIN' }, 'USER_LOGIN'),
      h('option', { value: 'SERVICE_ACCOUNT' }, 'SERVICE_ACCOUNT'),
      h('option', { value: 'AGENT' }, 'AGENT'),
    );
    const access = h('input', { id: 'client-access', type: 'number', placeholder: 'access s' });
    const idLife = h('input', { id: 'client-id-life', type: 'number', placeholder: 'id s' });
    const refresh = h('input', { id: 'client-refresh', type: 'number', placeholder: 'refresh s' });

    async function configure(): Promise<void> {
      const lifetimes: { access_lifetime_s?: number; id_lifetime_s?: number; refresh_lifetime_s?: number } = {};
      if (access.value) lifetimes.access_lifetime_s = Number(access.value);
      if (idLife.value) lifetimes.id_lifetime_s = Number(idLife.value);
      if (refresh.value) lifetimes.refresh_lifetime_s = Number(refresh.value);
      try {
        await client.configureOauthClient(kind.value, lifetimes);
        toast('client configured');
        await show('clients');
      } catch (err) {
        toast(describe(err), 'error');
      }
    }

    content.replaceChildren(
      section(
        'OAuth clients',
        clients.length === 0
          ? h('p', { class: 'empty' }, 'No clients configured.')
          : table(
              ['Client', 'Kind', 'Access (s)', 'Id (s)', 'Refresh (s)'],
              clients.map((c) => [
                h('code', {}, c.client_id),
                c.kind,
                String(c.access_lifetime_s),
                String(c.id_lifetime_s),
                String(c.refresh_lifetime_s),
              ]),
            ),
      ),
      section(
        'Configure client',
        formRow('Kind', kind),
        formRow('Access lifetime', access),
        formRow('Id lifetime', idLife),
        formRow('Refresh lifetime', refresh),
        h('button', { id: 'client-configure', class: 'primary', onclick: () => void configure() }, 'Apply'),
      ),
    );
  }

  // -- secrets (metadata only) -----------------------------------------------------------

  async function renderSecrets(openShares?: string): Promise<void> {
    const { credentials } = await client.listSecrets();
    const sharesBox = h('div', { id: 'shares-box' });

    async function remove(token: string): Promise<void> {
      try {
        await client.deleteSecret(token);
        toast(`${token} deleted`);
      } catch (err) {
        toast(describe(err), 'error');
      }
      await show('secrets');
    }

    async function openSharePanel(meta: SecretMetaDoc): Promise<void> {
      const { shares } = await client.listShares(meta.credential_token);

      const grantee = h('input', { id: 'share-grantee', type: 'text', placeholder: 'user:ten-…:usr-…' });
      const permission = h(
        'select',
        { id: 'share-permission' },
        h('option', { value: 'READ' }, 'READ'),
        h('option', { value: 'WRITE' }, 'WRITE'),
        h('option', { value: 'OWNER' }, 'OWNER'),
      );

      async function share(): Promise<void> {
        try {
          await client.shareSecret(meta.credential_token, grantee.value.trim(), permission.value);
          toast('credential shared');
          await renderSecrets(meta.credential_token);
        } catch (err) {
          toast(describe(err), 'error');
        }
      }

      async function revoke(ref: string): Promise<void> {
        try {
          await client.revokeShare(meta.credential_token, ref);
          toast('share revoked');
          await renderSecrets(meta.credential_token);
        } catch (err) {
          toast(describe(err), 'error');
        }
      }

      sharesBox.replaceChildren(
        section(
          `Shares for ${meta.credential_token}`,
          shares.length === 0
            ? h('p', { class: 'empty' }, 'Not shared.')
            : table(
                ['Grantee', 'Permission', 'Granted by', ''],
                shares.map((s) => [
                  h('code', {}, s.grantee),
                  s.permission,
                  h('code', {}, s.granted_by),
                  h(
                    'button',
                    { class: 'revoke-share', 'data-ref': s.grantee, onclick: () => void revoke(s.grantee) },
                    'Revoke',
                  ),
                ]),
              ),
          formRow('Grantee ref', grantee),
          formRow('Permission', permission),
          h('button', { id: 'share-submit', class: 'primary', onclick: () => void share() }, 'Share'),
        ),
      );
    }

    content.replaceChildren(
      section(
        'Credentials (metadata only)',
        h('p', {}, 'Secret payloads are never retrieved or displayed here; gateways fetch them over the API.'),
        credentials.length === 0
          ? h('p', { class: 'empty' }, 'No credentials visible to this tenant.')
          : table(
              ['Token', 'Type', 'Version', 'Description', 'Owner', 'Updated', '', ''],
              credentials.map((meta) => [
                h('code', {}, meta.credential_token),
                meta.ctype,
                String(meta.version),
                meta.description || '—',
                h('code', {}, meta.owner),
                when(meta.updated_at),
                h(
                  'button',
                  { class: 'open-shares', 'data-cred': meta.credential_token, onclick: () => void openSharePanel(meta) },
                  'Shares',
                ),
                h(
                  'button',
                  { class: 'delete-secret', 'data-cred': meta.credential_token, onclick: () => void remove(meta.credential_token) },
                  'Delete',
                ),
              ]),
            ),
      ),
      sharesBox,
    );

    if (openShares) {
      const match = credentials.find((c) => c.credential_token === openShares);
      if (match) await openSharePanel(match);
    }
  }

  // -- child tenants ------------------------------------------------------------------------

  async function renderChildren(): Promise<void> {
    const { tenants } = await client.listChildren(session.tenantId ?? '');

    const name = h('input', { id: 'child-name', type: 'text' });
    const email = h('input', { id: 'child-email', type: 'text' });
    const uri = h('input', { id: 'child-uri', type: 'text' });

    async function create(): Promise<void> {
      if (!name.value.trim() || !validEmail(email.value.trim()) || !validRedirectUri(uri.value.trim())) {
        toast('name, valid email, and an absolute redirect URI are required', 'error');
        return;
      }
      try {
        const result = await client.createChildTenant({
          name: name.value.trim(),
          contact_email: email.value.trim(),
          redirect_uris: [uri.value.trim()],
          description: '',
        });
        revealOnce(
          `Child tenant ${result.tenant_id}`,
          [
            ['client_id', result.client_id],
            ['client_secret', result.client_secret],
          ],
          () => void show('children'),
        );
      } catch (err) {
        toast(describe(err), 'error');
      }
    }

    content.replaceChildren(
      section(
        'Child tenants',
        tenants.length === 0
          ? h('p', { class: 'empty' }, 'No child tenants.')
          : table(
              ['Tenant', 'Name', 'Status', 'Created'],
              tenants.map((t) => [
                h('code', {}, t.tenant_id),
                t.profile.name,
                h('span', { class: `badge status-${t.status.toLowerCase()}` }, t.status),
                when(t.created_at),
              ]),
            ),
      ),
      section(
        'Create child tenant',
        formRow('Name', name),
        formRow('Contact email', email),
        formRow('Redirect URI', uri),
        h('button', { id: 'child-create', class: 'primary', onclick: () => void create() }, 'Create'),
      ),
    );
  }

  void show('overview');
  return { show };
}
