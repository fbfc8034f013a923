/** Dashboard wiring: five panels around one ViewState.
 *
 * Control/model-tree, causal graph, debate chart, relation-environment and
 * latent-factors charts, and the justification panel. The analyst steers
 * all graph refinement from here; every displayed number comes from an API
 * response.
 */

import { ApiClient } from './api.js';
import {
  DebateChartPanel,
  EnvironmentChartPanel,
  LatentChartPanel,
} from './panels/charts.js';
import { GraphPanel } from './panels/graph.js';
import { JustificationPanel } from './panels/justification.js';
import { ModelTreePanel } from './panels/tree.js';
import { ViewState } from './state.js';
import type {
  ChartFinding,
  DebateChart,
  Edge,
  Justification,
  ModelPayload,
  Variable,
} from './types.js';

interface EnvironmentContext {
  edgeId: string;
  causeId: string;
  effectId: string;
  causeLevel: string;
  effectLevel: string;
}

export class Dashboard {
  readonly state = new ViewState();
  readonly tree: ModelTreePanel;
  readonly graph: GraphPanel;
  readonly debate: DebateChartPanel;
  readonly environment: EnvironmentChartPanel;
  readonly latent: LatentChartPanel;
  readonly justification: JustificationPanel;

  private debateJustifications: Justification[] = [];
  private environmentJustifications: Justification[] = [];
  private latentJustifications: Justification[] = [];
  private envContext: EnvironmentContext | null = null;
  private latentTarget: string | null = null;
  private activeEdge: Edge | null = null;

  constructor(
    readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    const panel = (id: string): HTMLElement => {
      const el = document.createElement('section');
      el.id = id;
      root.appendChild(el);
      return el;
    };
    this.tree = new ModelTreePanel(panel('panel-tree'), {
      onSelectModel: (mid) => void this.openModel(mid),
    });
    this.graph = new GraphPanel(panel('panel-graph'), {
      onEdgeClick: (edge) => void this.onEdgeClick(edge),
      onVariableClick: (variable) => void this.onVariableClick(variable),
    });
    this.debate = new DebateChartPanel(panel('panel-debate'), {
      onBarClick: (side, row, chart) => void this.onBarClick(side, row, chart),
    });
    this.environment = new EnvironmentChartPanel(panel('panel-environment'), {
      onAccept: (finding, kind) => void this.acceptRelationFinding(finding, kind),
      onFindingClick: (finding) => this.highlightFinding(finding),
    });
    this.latent = new LatentChartPanel(panel('panel-latent'), {
      onAccept: (finding) => void this.acceptLatentFinding(finding),
      onFindingClick: (finding) => this.highlightFinding(finding),
    });
    this.justification = new JustificationPanel(panel('panel-justification'));
  }

  async open(projectId: string, modelId?: string): Promise<void> {
    this.state.projectId = projectId;
    const project = await this.api.getProject(projectId);
    const mid = modelId ?? project.tree.root;
    this.tree.setActive(mid);
    this.tree.render(project);
    await this.openModel(mid);
  }

  async openModel(modelId: string): Promise<void> {
    if (!this.state.projectId) return;
    this.state.modelId = modelId;
    this.tree.setActive(modelId);
    const seq = this.api.nextSequence();
    const payload = await this.api.getModel(this.state.projectId, modelId);
    if (!this.state.apply('graph', seq)) return;
    this.graph.render(payload.model);
  }

  private renderJustifications(): void {
    this.justification.render([
      ...this.debateJustifications,
      ...this.environmentJustifications,
      ...this.latentJustifications,
    ]);
  }

  private async onEdgeClick(edge: Edge): Promise<void> {
    const { projectId, modelId } = this.state;
    if (!projectId || !modelId) return;
    this.state.select({ kind: 'edge', id: edge.id });
    this.activeEdge = edge;
    const seq = this.api.nextSequence();
    const response = await this.api.debate(projectId, modelId, edge.id);
    if (!this.state.apply('debate', seq)) return;
    this.debate.render(response);
    this.debateJustifications = response.justifications;
    this.renderJustifications();
  }

  /** Clicking a bar highlights its rationale and pulls the environment
   * chart for that side's direction at the bar's level combination. */
  private async onBarClick(
    side: 'left' | 'right',
    rowIndex: number,
    chart: DebateChart,
  ): Promise<void> {
    const row = chart.rows[rowIndex];
    const bar = row[side];
    if (bar.justification) {
      this.justification.highlight(
        bar.justification.exchange_key,
        bar.justification.span,
      );
    }
    const edge = this.activeEdge;
    if (!edge) return;
    const causeName = side === 'left' ? chart.left_var : chart.right_var;
    const causeId = this.variableIdByName(causeName) ?? edge.src;
    await this.showEnvironment(edge, causeId, row.cause_level, row.effect_level);
  }

  /** Fetch and display the relation-environment chart for one direction
   * and level combination of an edge. */
  async showEnvironment(
    edge: Edge,
    causeId: string,
    causeLevel: string,
    effectLevel: string,
  ): Promise<void> {
    const { projectId, modelId } = this.state;
    if (!projectId || !modelId) return;
    const effectId = causeId === edge.src ? edge.dst : edge.src;
    this.envContext = {
      edgeId: edge.id,
      causeId,
      effectId,
      causeLevel,
      effectLevel,
    };
    const seq = this.api.nextSequence();
    const response = await this.api.environment(
      projectId, modelId, edge.id, causeLevel, effectLevel,
    );
    if (!this.state.apply('environment', seq)) return;
    this.environment.render(response.chart);
    this.environmentJustifications = response.justifications;
    this.renderJustifications();
  }

  private async onVariableClick(variable: Variable): Promise<void> {
    const { projectId, modelId } = this.state;
    if (!projectId || !modelId) return;
    this.state.select({ kind: 'variable', id: variable.id });
    this.graph.setSelected(variable.id);
    this.latentTarget = variable.id;
    const seq = this.api.nextSequence();
    const response = await this.api.latent(projectId, modelId, variable.id);
    if (!this.state.apply('latent', seq)) return;
    this.latent.render(response.chart);
    this.latentJustifications = response.justifications;
    this.renderJustifications();
  }

  private highlightFinding(finding: ChartFinding): void {
    const all = [
      ...this.environmentJustifications,
      ...this.latentJustifications,
    ];
    const entry = all.find((j) => j.name === finding.name);
    if (entry) {
      this.justification.highlight(entry.exchange_key, entry.span);
    }
  }

  /** Analyst accepts a confounder or mediator: PATCH, then redraw the
   * graph from the response so the dotted additions appear. */
  private async acceptRelationFinding(
    finding: ChartFinding,
    kind: 'confounder' | 'mediator' | 'latent',
  ): Promise<void> {
    const context = this.envContext;
    const { projectId, modelId } = this.state;
    if (!context || !projectId || !modelId || kind === 'latent') return;
    const response = await this.api.patchEdges(projectId, modelId, {
      op: 'add_third',
      kind,
      cause: context.causeId,
      effect: context.effectId,
      cause_level: context.causeLevel,
      effect_level: context.effectLevel,
      finding: {
        name: finding.name,
        strength: finding.strength,
        direction: finding.direction ?? null,
      },
    });
    this.applyModelPayload(response);
  }

  private async acceptLatentFinding(finding: ChartFinding): Promise<void> {
    const { projectId, modelId } = this.state;
    if (!this.latentTarget || !projectId || !modelId) return;
    const response = await this.api.patchEdges(projectId, modelId, {
      op: 'add_latent',
      target: this.latentTarget,
      finding: {
        name: finding.name,
        strength: finding.strength,
        sign: finding.direction ?? 'positive',
      },
    });
    this.applyModelPayload(response);
  }

  private applyModelPayload(payload: ModelPayload): void {
    const seq = this.api.nextSequence();
    if (!this.state.apply('graph', seq)) return;
    this.graph.render(payload.model);
  }

  private variableIdByName(name: string): string | null {
    const model = this.graph.currentModel();
    return model?.variables.find((v) => v.name === name)?.id ?? null;
  }
}

export function createDashboard(root: HTMLElement, api: ApiClient): Dashboard {
  return new Dashboard(root, api);
}
