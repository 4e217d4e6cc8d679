// Requester wizard: inline validation, step flow, and submission.

import { beforeEach, describe, expect, it } from 'vitest';
import { ApiClient } from '../src/api.js';
import { Session } from '../src/session.js';
import { mountWizard, validEmail, validRedirectUri } from '../src/wizard.js';
import { MockFetch, created, fail, freshRoot, input, click, waitFor } from './helpers.js';

function build(mock: MockFetch): { root: HTMLElement; client: ApiClient } {
  const root = freshRoot();
  const client = new ApiClient('http://api.test', new Session(), mock.fn);
  mountWizard(root, client);
  return { root, client };
}

describe('field validators', () => {
  it('accepts plausible emails and rejects junk', () => {
    expect(validEmail('pi@campus.edu')).toBe(true);
    expect(validEmail('a@b')).toBe(true);
    expect(validEmail('nope')).toBe(false);
    expect(validEmail('a b@c.org')).toBe(false);
    expect(validEmail('@x.org')).toBe(false);
  });

  it('requires absolute redirect URIs', () => {
    expect(validRedirectUri('https://g.example.org/cb')).toBe(true);
    expect(validRedirectUri('http://localhost:8080/cb')).toBe(true);
    expect(validRedirectUri('/relative/path')).toBe(false);
    expect(validRedirectUri('not a uri')).toBe(false);
    expect(validRedirectUri('file:///etc/passwd')).toBe(false);
  });
});

describe('wizard flow', () => {
  let mock: MockFetch;

  beforeEach(() => {
    mock = new MockFetch();
    mock.on('POST', '/api/v1/tenants', () => created({ tenant_id: 'ten-new1', status: 'REQUESTED' }));
  });

  it('flags invalid profile fields inline without calling the API', () => {
    const { root } = build(mock);
    input('#wiz-name', '', root);
    input('#wiz-email', 'not-an-email', root);
    click('#wiz-next', root);
    const errors = Array.from(root.querySelectorAll('.field-error')).map((e) => e.textContent);
    expect(errors.some((e) => e?.includes('name'))).toBe(true);
    expect(errors.some((e) => e?.includes('email'))).toBe(true);
    expect(root.textContent).toContain('Step 1 of 3');
    expect(mock.calls.length).toBe(0);
  });

  it('rejects malformed redirect URIs and requires at least one', () => {
    const { root } = build(mock);
    input('#wiz-name', 'Campus Gateway', root);
    input('#wiz-email', 'pi@campus.edu', root);
    click('#wiz-next', root);
    expect(root.textContent).toContain('Step 2 of 3');

    input('#wiz-uri', 'not-a-uri', root);
    click('#wiz-add-uri', root);
    expect(root.querySelector('.field-error')?.textContent).toContain('absolute');

    click('#wiz-next', root);
    expect(root.querySelector('.field-error')?.textContent).toContain('at least one');
    expect(mock.calls.length).toBe(0);
  });

  it('collects URIs with add/remove and preserves state across back', () => {
    const { root } = build(mock);
    input('#wiz-name', 'Campus Gateway', root);
    input('#wiz-email', 'pi@campus.edu', root);
    click('#wiz-next', root);

    input('#wiz-uri', 'https://a.example.org/cb', root);
    click('#wiz-add-uri', root);
    input('#wiz-uri', 'https://b.example.org/cb', root);
    click('#wiz-add-uri', root);
    expect(root.querySelectorAll('#wiz-uri-list li').length).toBe(2);

    click('.remove-uri', root);
    expect(root.querySelectorAll('#wiz-uri-list li').length).toBe(1);
    expect(root.textContent).toContain('https://b.example.org/cb');

    click('#wiz-back', root);
    expect((root.querySelector('#wiz-name') as HTMLInputElement).value).toBe('Campus Gateway');
    click('#wiz-next', root);
    expect(root.querySelectorAll('#wiz-uri-list li').length).toBe(1);
  });

  it('submits the reviewed profile and shows the REQUESTED tenant id', async () => {
    const { root } = build(mock);
    input('#wiz-name', 'Campus Gateway', root);
    input('#wiz-email', 'pi@campus.edu', root);
    input('#wiz-desc', 'Genomics portal', root);
    click('#wiz-next', root);
    input('#wiz-uri', 'https://g.example.org/cb', root);
    click('#wiz-add-uri', root);
    click('#wiz-next', root);

    expect(root.textContent).toContain('Step 3 of 3');
    expect(root.textContent).toContain('Campus Gateway');
    expect(root.textContent).toContain('https://g.example.org/cb');

    click('#wiz-submit', root);
    await waitFor(() => root.querySelector('#wiz-tenant-id') != null, 'submission result');

    expect(mock.calls.length).toBe(1);
    expect(mock.calls[0]?.body).toEqual({
      name: 'Campus Gateway',
      contact_email: 'pi@campus.edu',
      redirect_uris: ['https://g.example.org/cb'],
      description: 'Genomics portal',
    });
    expect(root.querySelector('#wiz-tenant-id')?.textContent).toBe('ten-new1');
    expect(root.textContent).toContain('REQUESTED');
  });

  it('shows a service rejection inline and stays on review', async () => {
    mock.on('POST', '/api/v1/tenants', () => fail(422, 'VALIDATION', 'tenant name must be 1-128 characters'));
    const { root } = build(mock);
    input('#wiz-name', 'Campus Gateway', root);
    input('#wiz-email', 'pi@campus.edu', root);
    click('#wiz-next', root);
    input('#wiz-uri', 'https://g.example.org/cb', root);
    click('#wiz-add-uri', root);
    click('#wiz-next', root);
    click('#wiz-submit', root);

    await waitFor(() => root.querySelector('.field-error') != null, 'inline error');
    expect(root.querySelector('.field-error')?.textContent).toContain('VALIDATION');
    expect(root.querySelector('#wiz-submit')).not.toBeNull();
  });
});
