/** Causal graph panel: renders a model with the shared encoding scheme.
 *
 * Red lines carry positive causation, green negative, yellow touches a
 * categorical variable, blue marks undirected (correlated, potentially
 * causal) edges; line thickness follows |weight|; dotted elements are
 * hypothesized and await data. The outcome variable is a purple oval and
 * the selected node is cyan.
 */

import { layeredLayout } from '../layout.js';
import type { CausalModel, Edge, Variable } from '../types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export const EDGE_COLORS = {
  positive: '#c62828',
  negative: '#2e7d32',
  categorical: '#f9a825',
  unknown: '#607d8b',
  undirected: '#1565c0',
};

export interface GraphCallbacks {
  onEdgeClick?: (edge: Edge) => void;
  onVariableClick?: (variable: Variable) => void;
}

function thickness(weight: number | null): number {
  const w = Math.abs(weight ?? 0);
  if (w >= 0.5) return 4;
  if (w >= 0.2) return 2.5;
  return 1.2;
}

function edgeColor(edge: Edge): string {
  if (edge.orientation === 'undirected') return EDGE_COLORS.undirected;
  return EDGE_COLORS[edge.sign];
}

export class GraphPanel {
  private model: CausalModel | null = null;
  private selectedId: string | null = null;

  constructor(
    readonly root: HTMLElement,
    private readonly callbacks: GraphCallbacks = {},
  ) {
    root.classList.add('panel', 'graph-panel');
  }

  setSelected(id: string | null): void {
    this.selectedId = id;
    if (this.model) this.render(this.model);
  }

  currentModel(): CausalModel | null {
    return this.model;
  }

  render(model: CausalModel): void {
    this.model = model;
    this.root.replaceChildren();
    const title = document.createElement('h2');
    title.textContent = 'Causal Graph';
    this.root.appendChild(title);

    const layout = layeredLayout(model);
    const svg = document.createElementNS(SVG_NS, 'svg');
    svg.setAttribute('viewBox', `0 0 ${layout.width} ${layout.height}`);
    svg.setAttribute('width', String(layout.width));
    svg.setAttribute('height', String(layout.height));
    svg.setAttribute('data-testid', 'graph-svg');

    for (const edge of model.edges) {
      const a = layout.positions.get(edge.src);
      const b = layout.positions.get(edge.dst);
      if (!a || !b) continue;
      const line = document.createElementNS(SVG_NS, 'line');
      line.setAttribute('x1', String(a.x));
      line.setAttribute('y1', String(a.y));
      line.setAttribute('x2', String(b.x));
      line.setAttribute('y2', String(b.y));
      line.setAttribute('stroke', edgeColor(edge));
      line.setAttribute('stroke-width', String(thickness(edge.weight)));
      const classes = ['edge', edge.orientation, edge.sign, edge.status];
      if (edge.status === 'hypothesized') {
        line.setAttribute('stroke-dasharray', '6,4');
        classes.push('dotted');
      }
      line.setAttribute('class', classes.join(' '));
      line.setAttribute('data-edge-id', edge.id);
      line.addEventListener('click', () => this.callbacks.onEdgeClick?.(edge));
      svg.appendChild(line);
      if (edge.orientation === 'directed') {
        svg.appendChild(this.arrowHead(a, b, edgeColor(edge)));
      }
    }

    for (const variable of model.variables) {
      const pos = layout.positions.get(variable.id);
      if (!pos) continue;
      const group = document.createElementNS(SVG_NS, 'g');
      group.setAttribute('class', 'variable');
      group.setAttribute('data-variable-id', variable.id);
      const oval = document.createElementNS(SVG_NS, 'ellipse');
      oval.setAttribute('cx', String(pos.x));
      oval.setAttribute('cy', String(pos.y));
      oval.setAttribute('rx', '72');
      oval.setAttribute('ry', '26');
      const isOutcome = model.outcome === variable.id;
      const isSelected = this.selectedId === variable.id;
      oval.setAttribute(
        'fill',
        isSelected ? '#4dd0e1' : isOutcome ? '#9575cd' : 'white',
      );
      oval.setAttribute('stroke', '#37474f');
      const classes = ['node'];
      if (variable.provenance === 'hypothesized') {
        oval.setAttribute('stroke-dasharray', '5,4');
        classes.push('dotted', 'hypothesized');
      }
      if (isOutcome) classes.push('outcome');
      if (isSelected) classes.push('selected');
      oval.setAttribute('class', classes.join(' '));
      const label = document.createElementNS(SVG_NS, 'text');
      label.setAttribute('x', String(pos.x));
      label.setAttribute('y', String(pos.y + 4));
      label.setAttribute('text-anchor', 'middle');
      label.setAttribute('font-size', '12');
      label.textContent = variable.name;
      group.appendChild(oval);
      group.appendChild(label);
      group.addEventListener('click', () =>
        this.callbacks.onVariableClick?.(variable),
      );
      svg.appendChild(group);
    }
    this.root.appendChild(svg);
  }

  private arrowHead(
    a: { x: number; y: number },
    b: { x: number; y: number },
    color: string,
  ): SVGElement {
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const len = Math.hypot(dx, dy) || 1;
    // land the tip on the ellipse boundary rather than the center
    const tipX = b.x - (dx / len) * 74;
    const tipY = b.y - (dy / len) * 30;
    const left = Math.atan2(dy, dx) + Math.PI * 0.88;
    const right = Math.atan2(dy, dx) - Math.PI * 0.88;
    const head = document.createElementNS(SVG_NS, 'path');
    head.setAttribute(
      'd',
      `M ${tipX} ${tipY} L ${tipX + 12 * Math.cos(left)} ${tipY + 12 * Math.sin(left)} ` +
        `L ${tipX + 12 * Math.cos(right)} ${tipY + 12 * Math.sin(right)} Z`,
    );
    head.setAttribute('fill', color);
    head.setAttribute('class', 'arrow-head');
    return head;
  }
}
