// Tiny DOM helpers; no framework.

export type Child = Node | string | null | undefined;

type Attrs = Record<string, string | boolean | EventListener>;

export function h<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Attrs = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const el = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === 'function') {
      el.addEventListener(key.replace(/^on/, ''), value);
    } else if (typeof value === 'boolean') {
      if (value) el.setAttribute(key, '');
    } else {
      el.setAttribute(key, value);
    }
  }
  for (const child of children) {
    if (child == null) continue;
    el.append(child instanceof Node ? child : document.createTextNode(child));
  }
  return el;
}

export function table(headers: string[], rows: Child[][]): HTMLTableElement {
  return h(
    'table',
    { class: 'data' },
    h('thead', {}, h('tr', {}, ...headers.map((head) => h('th', {}, head)))),
    h('tbody', {}, ...rows.map((row) => h('tr', {}, ...row.map((cell) => h('td', {}, cell))))),
  );
}

export function toast(message: string, kind: 'info' | 'error' = 'info'): void {
  let rack = document.getElementById('toasts');
  if (!rack) {
    rack = h('div', { id: 'toasts' });
    document.body.append(rack);
  }
  const note = h('div', { class: `toast ${kind}`, role: 'status' }, message);
  rack.append(note);
  setTimeout(() => note.remove(), 4000);
}

export interface Modal {
  body: HTMLElement;
  close: () => void;
}

// close() wipes the body before removing the overlay so secret text nodes
// are gone even if something still holds a reference to the element
export function modal(title: string): Modal {
  const body = h('div', { class: 'modal-body' });
  const overlay = h(
    'div',
    { class: 'modal-overlay' },
    h('div', { class: 'modal', role: 'dialog', 'aria-label': title }, h('h3', {}, title), body),
  );
  document.body.append(overlay);
  return {
    body,
    close: () => {
      body.replaceChildren();
      overlay.remove();
    },
  };
}

// describe an unknown error for a toast
export function describe(err: unknown): string {
  if (err instanceof Error) return err.message;
  return String(err);
}
