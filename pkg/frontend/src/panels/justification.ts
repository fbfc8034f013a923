/** Justification panel: the generated rationale behind every chart element,
 * addressable by (exchange key, span) so charts can link back to the exact
 * words that produced them. */

import type { Justification } from '../types.js';

export class JustificationPanel {
  private entries: Justification[] = [];

  constructor(readonly root: HTMLElement) {
    root.classList.add('panel', 'justification-panel');
  }

  render(entries: Justification[]): void {
    this.entries = entries;
    this.root.replaceChildren();
    const title = document.createElement('h2');
    title.textContent = 'Causal Justification Panel';
    this.root.appendChild(title);
    const list = document.createElement('ol');
    list.className = 'justifications';
    entries.forEach((entry, index) => {
      const item = document.createElement('li');
      item.className = 'justification';
      item.dataset.exchangeKey = entry.exchange_key;
      item.dataset.span = `${entry.span[0]}-${entry.span[1]}`;
      item.dataset.index = String(index);
      const meta = document.createElement('span');
      meta.className = 'justification-meta';
      meta.textContent = entry.name
        ? `${entry.name}`
        : entry.cause
          ? `${entry.cause} (${entry.cause_level} → ${entry.effect_level})`
          : entry.exchange_key.slice(0, 8);
      const text = document.createElement('p');
      text.textContent = entry.text;
      item.append(meta, text);
      list.appendChild(item);
    });
    this.root.appendChild(list);
  }

  /** Scrolls to and highlights the entry linked from a chart element. */
  highlight(exchangeKey: string, span: [number, number]): HTMLElement | null {
    for (const el of this.root.querySelectorAll<HTMLElement>('.justification')) {
      const hit =
        el.dataset.exchangeKey === exchangeKey &&
        el.dataset.span === `${span[0]}-${span[1]}`;
      el.classList.toggle('highlighted', hit);
      if (hit) {
        el.scrollIntoView?.({ block: 'nearest' });
        return el;
      }
    }
    return null;
  }

  entryFor(exchangeKey: string, span: [number, number]): Justification | undefined {
    return this.entries.find(
      (e) =>
        e.exchange_key === exchangeKey &&
        e.span[0] === span[0] &&
        e.span[1] === span[1],
    );
  }
}
