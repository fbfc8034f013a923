/** Contract tests against the recorded API fixtures. */

import { beforeEach, describe, expect, it } from 'vitest';

import { createDashboard, Dashboard } from '../src/app.js';
import type {
  DebateResponse,
  EnvironmentResponse,
  Edge,
  LatentResponse,
  ModelPayload,
  PatchResponse,
  ProjectPayload,
} from '../src/types.js';
import { clientFor, fixture, type RecordedCall, type Route } from './helpers.js';

const carProject = fixture<ProjectPayload>('car_project');
const carModel = fixture<ModelPayload>('car_model');
const carDebate = fixture<DebateResponse>('car_debate');
const carEnvironment = fixture<EnvironmentResponse>('car_environment');
const carPatchTorque = fixture<PatchResponse>('car_patch_torque');
const leProject = fixture<ProjectPayload>('le_project');
const leModel = fixture<ModelPayload>('le_model');
const leDebate = fixture<DebateResponse>('le_debate');
const leLatent = fixture<LatentResponse>('le_latent');

function edgeBetween(model: ModelPayload, a: string, b: string): Edge {
  const names = new Map(model.model.variables.map((v) => [v.id, v.name]));
  const edge = model.model.edges.find((e) => {
    const pair = new Set([names.get(e.src), names.get(e.dst)]);
    return pair.has(a) && pair.has(b);
  });
  if (!edge) throw new Error(`no edge ${a} -- ${b}`);
  return edge;
}

/** Let the fetch -> json -> render chains settle. */
async function flush(): Promise<void> {
  for (let i = 0; i < 4; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

function carRoutes(): Route[] {
  return [
    { match: `GET /projects/${carProject.project}/models/`, payload: carModel },
    { match: `GET /projects/${carProject.project}`, payload: carProject },
    { match: /POST .*\/debate$/, payload: carDebate },
    { match: /POST .*\/environment$/, payload: carEnvironment },
    { match: /PATCH .*\/edges$/, payload: carPatchTorque },
  ];
}

async function openCar(routes: Route[] = carRoutes()): Promise<{
  dashboard: Dashboard;
  calls: RecordedCall[];
  root: HTMLElement;
}> {
  const root = document.createElement('main');
  document.body.replaceChildren(root);
  const { api, calls } = clientFor(routes);
  const dashboard = createDashboard(root, api);
  await dashboard.open(carProject.project);
  return { dashboard, calls, root };
}

beforeEach(() => {
  document.body.replaceChildren();
});

describe('dashboard panels', () => {
  it('renders all five panels from recorded fixtures', async () => {
    const { root, dashboard } = await openCar();
    const edge = edgeBetween(carModel, 'cylinders', 'displacement');
    root
      .querySelector<SVGLineElement>(`[data-edge-id="${edge.id}"]`)!
      .dispatchEvent(new Event('click'));
    await flush();
    await dashboard.showEnvironment(
      edgeBetween(carModel, 'weight', 'acceleration'),
      edgeBetween(carModel, 'weight', 'acceleration').src,
      'higher',
      'lower',
    );

    expect(root.querySelector('#panel-tree .model-tree')).toBeTruthy();
    expect(root.querySelector('#panel-graph svg')).toBeTruthy();
    expect(root.querySelectorAll('#panel-debate .debate-row')).toHaveLength(5);
    expect(
      root.querySelectorAll('#panel-environment .finding').length,
    ).toBeGreaterThan(0);
    expect(
      root.querySelectorAll('#panel-justification .justification').length,
    ).toBeGreaterThan(0);
    expect(root.querySelector('#panel-latent')).toBeTruthy();
  });

  it('shows every number from the API response, unmodified', async () => {
    const { root } = await openCar();
    const edge = edgeBetween(carModel, 'cylinders', 'displacement');
    root
      .querySelector<SVGLineElement>(`[data-edge-id="${edge.id}"]`)!
      .dispatchEvent(new Event('click'));
    await flush();

    const bars = [...root.querySelectorAll<HTMLElement>('.debate-bar')];
    const rendered = bars.map((b) => Number(b.dataset.score));
    const expected = carDebate.chart.rows.flatMap((r) => [
      r.left.score,
      r.right.score,
    ]);
    expect(rendered).toEqual(expected);

    const graphEdges = root.querySelectorAll('#panel-graph line.edge');
    expect(graphEdges).toHaveLength(carModel.model.edges.length);
  });

  it('renders the graph with the shared encoding scheme', async () => {
    const { root } = await openCar();
    const svg = root.querySelector('#panel-graph svg')!;
    const byId = new Map(
      [...svg.querySelectorAll<SVGLineElement>('line.edge')].map((l) => [
        l.dataset.edgeId,
        l,
      ]),
    );
    // undirected (correlated, potentially causal) edges are blue
    const undirected = carModel.model.edges.find(
      (e) => e.orientation === 'undirected',
    )!;
    expect(byId.get(undirected.id)!.getAttribute('stroke')).toBe('#1565c0');
    // thickness tracks |weight|
    const heavy = carModel.model.edges.find((e) => (e.weight ?? 0) < -0.5);
    if (heavy) {
      expect(
        Number(byId.get(heavy.id)!.getAttribute('stroke-width')),
      ).toBeGreaterThanOrEqual(4);
    }
  });

  it('encodes directed signs, categorical links, outcome, and selection', async () => {
    const root = document.createElement('main');
    document.body.replaceChildren(root);
    const { api } = clientFor([]);
    const dashboard = createDashboard(root, api);
    const model = {
      id: 'm', name: 'enc', outcome: 'vy',
      variables: [
        { id: 'vx', name: 'X', kind: 'continuous' as const,
          provenance: 'measured' as const, dataset_column: 'X' },
        { id: 'vy', name: 'Y', kind: 'continuous' as const,
          provenance: 'measured' as const, dataset_column: 'Y' },
        { id: 'vc', name: 'C', kind: 'categorical' as const,
          provenance: 'measured' as const, dataset_column: 'C' },
        { id: 'vh', name: 'H', kind: 'continuous' as const,
          provenance: 'hypothesized' as const, dataset_column: null },
      ],
      edges: [
        { id: 'pos', src: 'vx', dst: 'vy', orientation: 'directed' as const,
          sign: 'positive' as const, weight: 0.7,
          status: 'data_confirmed' as const, role: 'plain' as const,
          origin: 'algorithm' as const },
        { id: 'cat', src: 'vc', dst: 'vy', orientation: 'directed' as const,
          sign: 'categorical' as const, weight: 0.3,
          status: 'data_confirmed' as const, role: 'plain' as const,
          origin: 'algorithm' as const },
        { id: 'hyp', src: 'vh', dst: 'vx', orientation: 'directed' as const,
          sign: 'negative' as const, weight: -0.8,
          status: 'hypothesized' as const, role: 'latent_link' as const,
          origin: 'llm' as const },
      ],
    };
    dashboard.graph.render(model);
    dashboard.graph.setSelected('vx');
    const stroke = (id: string) =>
      root
        .querySelector<SVGLineElement>(`[data-edge-id="${id}"]`)!
        .getAttribute('stroke');
    expect(stroke('pos')).toBe('#c62828'); // positive causation renders red
    expect(stroke('cat')).toBe('#f9a825'); // categorical link renders yellow
    expect(stroke('hyp')).toBe('#2e7d32'); // negative causation renders green
    const hyp = root.querySelector<SVGLineElement>('[data-edge-id="hyp"]')!;
    expect(hyp.classList.contains('dotted')).toBe(true);
    expect(hyp.getAttribute('stroke-dasharray')).toBeTruthy();
    const hypNode = root.querySelector('ellipse.hypothesized')!;
    expect(hypNode.getAttribute('stroke-dasharray')).toBeTruthy();
    expect(root.querySelector('ellipse.outcome')!.getAttribute('fill')).toBe(
      '#9575cd',
    );
    expect(root.querySelector('ellipse.selected')!.getAttribute('fill')).toBe(
      '#4dd0e1',
    );
  });
});

describe('debate bar interactions', () => {
  it('clicking the general bar highlights the linked justification span', async () => {
    const root = document.createElement('main');
    document.body.replaceChildren(root);
    const routes: Route[] = [
      { match: `GET /projects/${leProject.project}/models/`, payload: leModel },
      { match: `GET /projects/${leProject.project}`, payload: leProject },
      { match: /POST .*\/debate$/, payload: leDebate },
      { match: /POST .*\/environment$/, payload: carEnvironment },
    ];
    const { api } = clientFor(routes);
    const dashboard = createDashboard(root, api);
    await dashboard.open(leProject.project);

    const edge = edgeBetween(leModel, 'percent fair or poor health',
                             'life expectancy');
    root
      .querySelector<SVGLineElement>(`[data-edge-id="${edge.id}"]`)!
      .dispatchEvent(new Event('click'));
    await flush();

    const generalLeft = root.querySelector<HTMLElement>(
      '.debate-row .debate-bar.left.grey',
    )!;
    expect(generalLeft.dataset.score).toBe('4');
    generalLeft.dispatchEvent(new Event('click'));
    await Promise.resolve();

    const highlighted = root.querySelector<HTMLElement>(
      '.justification.highlighted',
    );
    expect(highlighted).toBeTruthy();
    const ref = leDebate.chart.rows[0].left.justification!;
    expect(highlighted!.dataset.exchangeKey).toBe(ref.exchange_key);
    expect(highlighted!.dataset.span).toBe(`${ref.span[0]}-${ref.span[1]}`);
    // the linked text is the one shown in the panel
    expect(highlighted!.textContent).toContain(ref.text.slice(0, 40));
  });

  it('clicking a level bar requests the environment chart for those levels', async () => {
    const { root, calls } = await openCar();
    const edge = edgeBetween(carModel, 'cylinders', 'displacement');
    root
      .querySelector<SVGLineElement>(`[data-edge-id="${edge.id}"]`)!
      .dispatchEvent(new Event('click'));
    await flush();

    const hiLoRow = root.querySelectorAll('.debate-row')[2]!; // higher -> lower
    hiLoRow
      .querySelector<HTMLElement>('.debate-bar.left')!
      .dispatchEvent(new Event('click'));
    await flush();

    const envCall = calls.find((c) => c.url.endsWith('/environment'));
    expect(envCall).toBeTruthy();
    expect(envCall!.body).toEqual({
      cause_level: 'higher',
      effect_level: 'lower',
    });
  });
});

describe('accepting findings', () => {
  it('accepting the Torque mediator adds two dotted edges to the graph', async () => {
    const { root, dashboard, calls } = await openCar();
    const edge = edgeBetween(carModel, 'weight', 'acceleration');
    await dashboard.showEnvironment(edge, edge.src, 'higher', 'lower');

    const before = root.querySelectorAll('#panel-graph line.edge.dotted');
    expect(before).toHaveLength(0);

    const torqueBox = root.querySelector<HTMLElement>(
      '#panel-environment .finding[data-name="Torque"]',
    )!;
    expect(torqueBox).toBeTruthy();
    torqueBox
      .querySelector<HTMLElement>('.accept-finding')!
      .dispatchEvent(new Event('click'));
    await flush();

    const patch = calls.find((c) => c.method === 'PATCH')!;
    expect(patch.body).toMatchObject({
      op: 'add_third',
      kind: 'mediator',
      cause_level: 'higher',
      effect_level: 'lower',
      finding: { name: 'Torque', strength: 'strong', direction: 'positive' },
    });

    const dotted = root.querySelectorAll('#panel-graph line.edge.dotted');
    expect(dotted).toHaveLength(2);
    const torqueVar = carPatchTorque.model.variables.find(
      (v) => v.name === 'Torque',
    )!;
    const touching = carPatchTorque.model.edges.filter(
      (e) => e.src === torqueVar.id || e.dst === torqueVar.id,
    );
    expect(touching.every((e) => e.status === 'hypothesized')).toBe(true);
  });

  it('clicking a variable fetches and renders the latent chart', async () => {
    const root = document.createElement('main');
    document.body.replaceChildren(root);
    const routes: Route[] = [
      { match: `GET /projects/${leProject.project}/models/`, payload: leModel },
      { match: `GET /projects/${leProject.project}`, payload: leProject },
      { match: /POST .*\/latent$/, payload: leLatent },
    ];
    const { api } = clientFor(routes);
    const dashboard = createDashboard(root, api);
    await dashboard.open(leProject.project);

    const pcp = leModel.model.variables.find(
      (v) => v.name === 'primary care physician rate',
    )!;
    root
      .querySelector<SVGGElement>(`[data-variable-id="${pcp.id}"]`)!
      .dispatchEvent(new Event('click'));
    await flush();

    const names = [
      ...root.querySelectorAll<HTMLElement>('#panel-latent .finding'),
    ].map((f) => f.dataset.name);
    const expected = [
      ...leLatent.chart.positives,
      ...leLatent.chart.negatives,
      ...leLatent.chart.categoricals,
    ].map((f) => f.name);
    expect(names).toEqual(expected);
    expect(names).toContain('Reimbursement Rates');
    expect(names).toContain('Medical Student Debt');
    // selection is rendered on the clicked node
    const selected = root.querySelector('#panel-graph ellipse.selected');
    expect(selected).toBeTruthy();
  });
});
