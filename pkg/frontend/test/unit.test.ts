import { describe, expect, it } from 'vitest';

import { ApiError } from '../src/api.js';
import { layeredLayout } from '../src/layout.js';
import { ViewState } from '../src/state.js';
import type { CausalModel, ModelPayload } from '../src/types.js';
import { clientFor, fixture } from './helpers.js';

const carModel = fixture<ModelPayload>('car_model');

describe('ViewState', () => {
  it('keeps at most one selection', () => {
    const state = new ViewState();
    state.select({ kind: 'edge', id: 'e1' });
    state.select({ kind: 'variable', id: 'v1' });
    expect(state.selected()).toEqual({ kind: 'variable', id: 'v1' });
  });

  it('drops stale responses by sequence number', () => {
    const state = new ViewState();
    expect(state.apply('debate', 2)).toBe(true);
    expect(state.apply('debate', 1)).toBe(false); // older response arrives late
    expect(state.apply('debate', 3)).toBe(true);
    expect(state.apply('graph', 1)).toBe(true); // per-panel counters
  });

  it('holds pending findings until taken', () => {
    const state = new ViewState();
    state.queueFinding({
      finding: { name: 'Torque', strength: 'strong', direction: 'positive' },
      kind: 'mediator',
      causeLevel: 'higher',
      effectLevel: 'lower',
    });
    expect(state.pending).toHaveLength(1);
    expect(state.takeFinding('Torque')?.finding.name).toBe('Torque');
    expect(state.pending).toHaveLength(0);
    expect(state.takeFinding('Torque')).toBeUndefined();
  });
});

describe('layeredLayout', () => {
  it('orders layers by directed depth with stable positions', () => {
    const model = carModel.model;
    const layout = layeredLayout(model);
    expect(layout.positions.size).toBe(model.variables.length);
    for (const e of model.edges) {
      if (e.orientation !== 'directed') continue;
      const a = layout.positions.get(e.src)!;
      const b = layout.positions.get(e.dst)!;
      expect(b.y).toBeGreaterThan(a.y);
    }
    const again = layeredLayout(model);
    expect([...again.positions.entries()]).toEqual(
      [...layout.positions.entries()],
    );
  });

  it('places disconnected nodes on the first layer', () => {
    const model: CausalModel = {
      id: 'm', name: 't', outcome: null,
      variables: [
        { id: 'a', name: 'A', kind: 'continuous', provenance: 'measured',
          dataset_column: 'A' },
        { id: 'b', name: 'B', kind: 'continuous', provenance: 'measured',
          dataset_column: 'B' },
      ],
      edges: [],
    };
    const layout = layeredLayout(model);
    expect(layout.positions.get('a')!.y).toBe(layout.positions.get('b')!.y);
  });
});

describe('ApiClient', () => {
  it('unwraps API error envelopes', async () => {
    const { api } = clientFor([
      {
        match: 'GET /projects/broken',
        payload: { error: { code: 'not_found', message: 'no project broken' } },
        status: 404,
      },
    ]);
    await expect(api.getProject('broken')).rejects.toMatchObject({
      code: 'not_found',
      message: 'no project broken',
    });
    await expect(api.getProject('broken')).rejects.toBeInstanceOf(ApiError);
  });

  it('issues monotonically increasing sequence numbers', () => {
    const { api } = clientFor([]);
    const a = api.nextSequence();
    const b = api.nextSequence();
    expect(b).toBeGreaterThan(a);
  });
});
