/** Layered DAG layout with stable ordering, so screenshots reproduce. */

import type { CausalModel } from './types.js';

export interface NodePosition {
  x: number;
  y: number;
}

export interface GraphLayout {
  positions: Map<string, NodePosition>;
  width: number;
  height: number;
}

const LAYER_GAP = 110;
const NODE_GAP = 170;
const MARGIN = 70;

/** Longest-path layering over the directed subgraph; undirected edges do
 * not constrain layers. Nodes order by id inside a layer. */
export function layeredLayout(model: CausalModel): GraphLayout {
  const depth = new Map<string, number>();
  const parents = new Map<string, string[]>();
  for (const v of model.variables) {
    parents.set(v.id, []);
  }
  for (const e of model.edges) {
    if (e.orientation === 'directed') {
      parents.get(e.dst)?.push(e.src);
    }
  }
  const visiting = new Set<string>();
  const layerOf = (id: string): number => {
    const known = depth.get(id);
    if (known !== undefined) {
      return known;
    }
    if (visiting.has(id)) {
      return 0; // defensive: the API never returns directed cycles
    }
    visiting.add(id);
    const ps = parents.get(id) ?? [];
    const layer = ps.length === 0 ? 0 : 1 + Math.max(...ps.map(layerOf));
    visiting.delete(id);
    depth.set(id, layer);
    return layer;
  };

  const layers = new Map<number, string[]>();
  for (const v of [...model.variables].sort((a, b) => a.id.localeCompare(b.id))) {
    const layer = layerOf(v.id);
    const bucket = layers.get(layer) ?? [];
    bucket.push(v.id);
    layers.set(layer, bucket);
  }

  const positions = new Map<string, NodePosition>();
  const layerCount = Math.max(...layers.keys()) + 1;
  const widest = Math.max(...[...layers.values()].map((ids) => ids.length));
  const width = MARGIN * 2 + (widest - 1) * NODE_GAP;
  for (const [layer, ids] of layers) {
    const rowWidth = (ids.length - 1) * NODE_GAP;
    ids.forEach((id, i) => {
      positions.set(id, {
        x: MARGIN + (width - 2 * MARGIN - rowWidth) / 2 + i * NODE_GAP,
        y: MARGIN + layer * LAYER_GAP,
      });
    });
  }
  return {
    positions,
    width,
    height: MARGIN * 2 + (layerCount - 1) * LAYER_GAP,
  };
}
