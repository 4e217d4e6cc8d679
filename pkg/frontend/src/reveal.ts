// One-time secret reveal. Issued credentials are rendered into a modal
// exactly once; closing wipes the nodes, and the portal keeps no other
// reference to the values, so they cannot be rendered again.

import { h, modal, toast } from './dom.js';

export function revealOnce(
  title: string,
  fields: Array<[label: string, value: string]>,
  onClose?: () => void,
): void {
  const { body, close } = modal(title);
  body.append(h('p', { class: 'reveal-note' }, 'Copy these values now — the portal cannot show them again.'));
  for (const [label, value] of fields) {
    body.append(
      h(
        'div',
        { class: 'cred-row' },
        h('span', { class: 'cred-label' }, label),
        h('code', { class: 'cred-value' }, value),
        h('button', { class: 'copy', onclick: () => copy(value) }, 'Copy'),
      ),
    );
  }
  body.append(
    h(
      'button',
      {
        class: 'primary reveal-done',
        onclick: () => {
          close();
          onClose?.();
        },
      },
      'I have stored these',
    ),
  );
}

function copy(value: string): void {
  try {
    const pending = navigator.clipboard?.writeText(value);
    if (pending) {
      pending.then(
        () => toast('copied'),
        () => toast('copy failed', 'error'),
      );
    }
  } catch {
    toast('copy failed', 'error');
  }
}
