/** Chart panels: debate, relation environment, and latent factors.
 *
 * These render API chart payloads verbatim; no score, strength, or sign is
 * computed client-side.
 */

import type {
  ChartFinding,
  DebateChart,
  DebateResponse,
  EnvironmentChart,
  LatentChart,
} from '../types.js';

const BAR_UNIT = 52; // px per rating point
const BAR_COLORS: Record<string, string> = {
  grey: '#9e9e9e',
  magenta: '#d81b60',
  skyblue: '#64b5f6',
};
const SHADES: Record<string, Record<string, string>> = {
  red: { weak: '#ffcdd2', medium: '#e57373', strong: '#d32f2f' },
  green: { weak: '#c8e6c9', medium: '#81c784', strong: '#388e3c' },
  blue: { weak: '#bbdefb', medium: '#64b5f6', strong: '#1976d2' },
  yellow: { weak: '#fff9c4', medium: '#fff176', strong: '#fbc02d' },
};

function levelLabel(causeLevel: string, effectLevel: string): string {
  return causeLevel === 'general' ? 'general' : `${causeLevel} → ${effectLevel}`;
}

export interface DebateCallbacks {
  /** Bar click: highlight the justification and, for level rows, fetch the
   * environment chart for that level combination. */
  onBarClick?: (side: 'left' | 'right', row: number, chart: DebateChart) => void;
}

export class DebateChartPanel {
  constructor(
    readonly root: HTMLElement,
    private readonly callbacks: DebateCallbacks = {},
  ) {
    root.classList.add('panel', 'debate-panel');
  }

  render(response: DebateResponse): void {
    const chart = response.chart;
    this.root.replaceChildren();
    const title = document.createElement('h2');
    title.textContent = 'Causal Debate Chart';
    this.root.appendChild(title);

    const header = document.createElement('div');
    header.className = 'debate-header';
    const left = document.createElement('span');
    left.className = 'debate-var left';
    left.textContent = chart.left_var;
    const right = document.createElement('span');
    right.className = 'debate-var right';
    right.textContent = chart.right_var;
    header.append(left, right);
    this.root.appendChild(header);

    chart.rows.forEach((row, index) => {
      const rowEl = document.createElement('div');
      rowEl.className = 'debate-row';
      rowEl.dataset.level = levelLabel(row.cause_level, row.effect_level);
      for (const side of ['left', 'right'] as const) {
        const bar = row[side];
        const barEl = document.createElement('button');
        barEl.type = 'button';
        barEl.className = `debate-bar ${side} ${bar.color_class}` +
          (bar.available ? '' : ' unavailable');
        barEl.dataset.side = side;
        barEl.dataset.row = String(index);
        barEl.dataset.score = String(bar.score);
        barEl.style.width = `${Math.max(bar.score * BAR_UNIT, 6)}px`;
        barEl.style.background = bar.available
          ? BAR_COLORS[bar.color_class]
          : 'transparent';
        barEl.title = bar.available ? `score ${bar.score}` : 'rating unavailable';
        barEl.textContent = bar.available ? String(bar.score) : '?';
        barEl.addEventListener('click', () =>
          this.callbacks.onBarClick?.(side, index, chart),
        );
        rowEl.appendChild(barEl);
      }
      const label = document.createElement('span');
      label.className = 'debate-level';
      label.textContent = rowEl.dataset.level ?? '';
      rowEl.insertBefore(label, rowEl.children[1]);
      this.root.appendChild(rowEl);
    });

    const verdict = document.createElement('p');
    verdict.className = 'debate-verdict';
    verdict.textContent =
      `verdict: ${response.dominance.verdict}` +
      (response.dominance.confounder_likely ? ' (confounder likely)' : '') +
      ` | sign ${chart.left_var}: ${response.sign_patterns.left}`;
    this.root.appendChild(verdict);
  }
}

export interface FindingCallbacks {
  onAccept?: (finding: ChartFinding, kind: 'confounder' | 'mediator' | 'latent') => void;
  onFindingClick?: (finding: ChartFinding) => void;
}

function findingBox(
  finding: ChartFinding,
  family: keyof typeof SHADES,
  kind: 'confounder' | 'mediator' | 'latent',
  callbacks: FindingCallbacks,
): HTMLElement {
  const box = document.createElement('div');
  box.className = `finding ${kind} ${finding.strength}`;
  box.style.background = SHADES[family][finding.strength];
  box.dataset.name = finding.name;
  const label = document.createElement('span');
  label.textContent =
    finding.name +
    (finding.direction ? (finding.direction === 'positive' ? ' ↑' : ' ↓') : '');
  label.addEventListener('click', () => callbacks.onFindingClick?.(finding));
  const accept = document.createElement('button');
  accept.type = 'button';
  accept.className = 'accept-finding';
  accept.textContent = 'accept';
  accept.addEventListener('click', () => callbacks.onAccept?.(finding, kind));
  box.append(label, accept);
  return box;
}

export class EnvironmentChartPanel {
  constructor(
    readonly root: HTMLElement,
    private readonly callbacks: FindingCallbacks = {},
  ) {
    root.classList.add('panel', 'environment-panel');
  }

  render(chart: EnvironmentChart): void {
    this.root.replaceChildren();
    const title = document.createElement('h2');
    title.textContent = 'Causal Relation Environment Chart';
    this.root.appendChild(title);

    const confRow = document.createElement('div');
    confRow.className = 'finding-row confounders';
    for (const f of chart.confounders) {
      confRow.appendChild(findingBox(f, 'red', 'confounder', this.callbacks));
    }
    this.root.appendChild(confRow);

    const relation = document.createElement('div');
    relation.className = 'relation';
    const cause = chart.cause_level === 'general'
      ? chart.cause
      : `${chart.cause_level} ${chart.cause}`;
    const effect = chart.effect_level === 'general'
      ? chart.effect
      : `${chart.effect_level} ${chart.effect}`;
    relation.textContent = `${cause} → ${effect}`;
    this.root.appendChild(relation);

    const medRow = document.createElement('div');
    medRow.className = 'finding-row mediators';
    for (const f of chart.mediators) {
      medRow.appendChild(findingBox(f, 'green', 'mediator', this.callbacks));
    }
    this.root.appendChild(medRow);
  }
}

export class LatentChartPanel {
  constructor(
    readonly root: HTMLElement,
    private readonly callbacks: FindingCallbacks = {},
  ) {
    root.classList.add('panel', 'latent-panel');
  }

  render(chart: LatentChart): void {
    this.root.replaceChildren();
    const title = document.createElement('h2');
    title.textContent = 'Latent Factors Chart';
    this.root.appendChild(title);

    const positives = document.createElement('div');
    positives.className = 'finding-row positives';
    for (const f of chart.positives) {
      positives.appendChild(findingBox(f, 'blue', 'latent', this.callbacks));
    }
    const target = document.createElement('div');
    target.className = 'latent-target';
    target.textContent = chart.target;
    const negatives = document.createElement('div');
    negatives.className = 'finding-row negatives';
    for (const f of chart.negatives) {
      negatives.appendChild(findingBox(f, 'yellow', 'latent', this.callbacks));
    }
    this.root.append(positives, target, negatives);
    if (chart.categoricals.length) {
      const cats = document.createElement('div');
      cats.className = 'finding-row categoricals';
      for (const f of chart.categoricals) {
        cats.appendChild(findingBox(f, 'yellow', 'latent', this.callbacks));
      }
      this.root.appendChild(cats);
    }
  }
}
