// Gateway request wizard: profile → redirect URIs → review, posting to
// POST /api/v1/tenants. Validation happens inline before each step change.

import { ApiClient, ApiError } from './api.js';
import { h, describe } from './dom.js';

export function validEmail(value: string): boolean {
  return /^[^\s@]+@[^\s@]+$/.test(value);
}

export function validRedirectUri(value: string): boolean {
  try {
    const url = new URL(value);
    return url.protocol !== '' && url.host !== '';
  } catch {
    return false;
  }
}

interface WizardState {
  name: string;
  email: string;
  description: string;
  uris: string[];
}

export function mountWizard(root: HTMLElement, client: ApiClient): void {
  const state: WizardState = { name: '', email: '', description: '', uris: [] };
  let step: 0 | 1 | 2 = 0;

  function render(): void {
    root.replaceChildren(
      h('h2', {}, 'Request a gateway tenant'),
      h('p', { class: 'step-indicator' }, `Step ${step + 1} of 3 — ${['Profile', 'Redirect URIs', 'Review'][step]}`),
      step === 0 ? profileStep() : step === 1 ? urisStep() : reviewStep(),
    );
  }

  function fieldError(message: string): HTMLElement {
    return h('p', { class: 'field-error', role: 'alert' }, message);
  }

  function profileStep(): HTMLElement {
    const panel = h(
      'div',
      { class: 'wizard-step' },
      h('label', { for: 'wiz-name' }, 'Gateway name'),
      h('input', { id: 'wiz-name', type: 'text', value: state.name }),
      h('label', { for: 'wiz-email' }, 'Contact email'),
      h('input', { id: 'wiz-email', type: 'text', value: state.email }),
      h('label', { for: 'wiz-desc' }, 'Description (optional)'),
      h('input', { id: 'wiz-desc', type: 'text', value: state.description }),
      h('div', { id: 'wiz-errors' }),
      h('button', { id: 'wiz-next', class: 'primary', onclick: () => next() }, 'Next'),
    );

    function next(): void {
      const name = (panel.querySelector('#wiz-name') as HTMLInputElement).value.trim();
      const email = (panel.querySelector('#wiz-email') as HTMLInputElement).value.trim();
      const description = (panel.querySelector('#wiz-desc') as HTMLInputElement).value.trim();
      const errors = panel.querySelector('#wiz-errors') as HTMLElement;
      errors.replaceChildren();
      if (!name || name.length > 128) errors.append(fieldError('name must be 1-128 characters'));
      if (!validEmail(email)) errors.append(fieldError('contact email must be a valid address'));
      if (errors.childElementCount > 0) return;
      state.name = name;
      state.email = email;
      state.description = description;
      step = 1;
      render();
    }

    return panel;
  }

  function urisStep(): HTMLElement {
    const panel = h(
      'div',
      { class: 'wizard-step' },
      h('p', {}, 'Where may the broker redirect after login? At least one absolute URI.'),
      h(
        'ul',
        { id: 'wiz-uri-list' },
        ...state.uris.map((uri, idx) =>
          h(
            'li',
            {},
            h('code', {}, uri),
            h(
              'button',
              {
                class: 'remove-uri',
                onclick: () => {
                  state.uris.splice(idx, 1);
                  render();
                },
              },
              'Remove',
            ),
          ),
        ),
      ),
      h('label', { for: 'wiz-uri' }, 'Redirect URI'),
      h('input', { id: 'wiz-uri', type: 'text' }),
      h('div', { id: 'wiz-errors' }),
      h('button', { id: 'wiz-add-uri', onclick: () => add() }, 'Add'),
      h('button', { id: 'wiz-back', onclick: () => back() }, 'Back'),
      h('button', { id: 'wiz-next', class: 'primary', onclick: () => next() }, 'Next'),
    );

    function add(): void {
      const input = panel.querySelector('#wiz-uri') as HTMLInputElement;
      const errors = panel.querySelector('#wiz-errors') as HTMLElement;
      errors.replaceChildren();
      const uri = input.value.trim();
      if (!validRedirectUri(uri)) {
        errors.append(fieldError('redirect URI must be absolute (scheme and host)'));
        return;
      }
      state.uris.push(uri);
      render();
    }

    function back(): void {
      step = 0;
      render();
    }

    function next(): void {
      const errors = panel.querySelector('#wiz-errors') as HTMLElement;
      errors.replaceChildren();
      if (state.uris.length === 0) {
        errors.append(fieldError('add at least one redirect URI'));
        return;
      }
      step = 2;
      render();
    }

    return panel;
  }

  function reviewStep(): HTMLElement {
    const panel = h(
      'div',
      { class: 'wizard-step' },
      h(
        'dl',
        { class: 'review' },
        h('dt', {}, 'Name'),
        h('dd', {}, state.name),
        h('dt', {}, 'Contact email'),
        h('dd', {}, state.email),
        h('dt', {}, 'Description'),
        h('dd', {}, state.description || '—'),
        h('dt', {}, 'Redirect URIs'),
        h('dd', {}, state.uris.join(', ')),
      ),
      h('div', { id: 'wiz-errors' }),
      h('button', { id: 'wiz-back', onclick: () => back() }, 'Back'),
      h('button', { id: 'wiz-submit', class: 'primary', onclick: () => void submit() }, 'Submit request'),
    );

    function back(): void {
      step = 1;
      render();
    }

    async function submit(): Promise<void> {
      const errors = panel.querySelector('#wiz-errors') as HTMLElement;
      errors.replaceChildren();
      try {
        const result = await client.requestTenant({
          name: state.name,
          contact_email: state.email,
          redirect_uris: state.uris,
          description: state.description,
        });
        root.replaceChildren(
          h('h2', {}, 'Request submitted'),
          h(
            'div',
            { id: 'wiz-result', class: 'notice' },
            h('p', {}, 'Your gateway request is now ', h('strong', {}, result.status), '.'),
            h('p', {}, 'Tenant id: ', h('code', { id: 'wiz-tenant-id' }, result.tenant_id)),
            h('p', {}, 'An operator will review it; credentials are issued on approval.'),
          ),
        );
      } catch (err) {
        const message = err instanceof ApiError ? `${err.code}: ${err.message}` : describe(err);
        errors.append(fieldError(message));
      }
    }

    return panel;
  }

  render();
}
