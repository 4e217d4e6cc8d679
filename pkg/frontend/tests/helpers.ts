// Shared test plumbing: a recording fetch fake and DOM helpers.

export interface RecordedCall {
  method: string;
  path: string;
  query: Record<string, string>;
  headers: Record<string, string>;
  body: any;
}

export interface MockResponse {
  status: number;
  json: unknown;
}

type Responder = (call: RecordedCall) => MockResponse;

export function ok(json: unknown): MockResponse {
  return { status: 200, json };
}

export function created(json: unknown): MockResponse {
  return { status: 201, json };
}

export function fail(status: number, code: string, message: string): MockResponse {
  return { status, json: { code, message, request_id: 'req-test' } };
}

export class MockFetch {
  readonly calls: RecordedCall[] = [];
  private handlers: Array<{ method: string; path: string | RegExp; respond: Responder }> = [];

  on(method: string, path: string | RegExp, respond: Responder): this {
    this.handlers.push({ method, path, respond });
    return this;
  }

  // last registered handler wins, so tests can override
  fn = (url: string, init: RequestInit): Promise<Response> => {
    const parsed = new URL(url, 'http://mock.test');
    const method = (init.method ?? 'GET').toUpperCase();
    const headers = Object.fromEntries(
      Object.entries((init.headers as Record<string, string>) ?? {}).map(([k, v]) => [k.toLowerCase(), v]),
    );
    const call: RecordedCall = {
      method,
      path: parsed.pathname,
      query: Object.fromEntries(parsed.searchParams),
      headers,
      body: typeof init.body === 'string' && init.body !== '' ? JSON.parse(init.body) : null,
    };
    this.calls.push(call);
    for (let i = this.handlers.length - 1; i >= 0; i--) {
      const handler = this.handlers[i];
      if (!handler || handler.method !== method) continue;
      const hit =
        typeof handler.path === 'string' ? handler.path === parsed.pathname : handler.path.test(parsed.pathname);
      if (!hit) continue;
      const { status, json } = handler.respond(call);
      const text = JSON.stringify(json);
      return Promise.resolve({
        ok: status >= 200 && status < 300,
        status,
        text: () => Promise.resolve(text),
      } as unknown as Response);
    }
    return Promise.reject(new Error(`no mock for ${method} ${parsed.pathname}`));
  };
}

export async function waitFor(check: () => boolean, label = 'condition', timeoutMs = 5000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    if (check()) return;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${label}`);
    await new Promise((resolve) => setTimeout(resolve, 20));
  }
}

export function freshRoot(): HTMLElement {
  document.body.innerHTML = '';
  const root = document.createElement('div');
  document.body.append(root);
  return root;
}

export function input(selector: string, value: string, scope: ParentNode = document): void {
  const el = scope.querySelector(selector) as HTMLInputElement | null;
  if (!el) throw new Error(`no input ${selector}`);
  el.value = value;
}

export function click(selector: string, scope: ParentNode = document): void {
  const el = scope.querySelector(selector) as HTMLElement | null;
  if (!el) throw new Error(`no element ${selector}`);
  el.click();
}

export function text(scope: ParentNode = document): string {
  return (scope as unknown as { textContent?: string }).textContent ?? document.body.textContent ?? '';
}

export function pageHtml(): string {
  return document.documentElement.outerHTML;
}
