/** Payload shapes of the workbench HTTP API. */

export interface Variable {
  id: string;
  name: string;
  kind: 'continuous' | 'categorical';
  provenance: 'measured' | 'hypothesized';
  dataset_column: string | null;
}

export interface Edge {
  id: string;
  src: string;
  dst: string;
  orientation: 'directed' | 'undirected';
  sign: 'positive' | 'negative' | 'categorical' | 'unknown';
  weight: number | null;
  status: 'data_confirmed' | 'hypothesized';
  role: 'plain' | 'confounder_link' | 'mediator_link' | 'latent_link';
  origin: 'algorithm' | 'user' | 'llm';
}

export interface CausalModel {
  id: string;
  name: string;
  outcome: string | null;
  variables: Variable[];
  edges: Edge[];
}

export interface ModelPayload {
  model: CausalModel;
  parent: string | null;
  children: string[];
  note: string;
}

export interface TreeNodeSummary {
  name: string;
  parent: string | null;
  note: string;
  n_variables: number;
  n_edges: number;
}

export interface ProjectPayload {
  project: string;
  name: string;
  domain: string;
  tree: { root: string; nodes: Record<string, TreeNodeSummary> };
}

export interface JustificationRef {
  exchange_key: string;
  span: [number, number];
  text: string;
}

export interface DebateBar {
  score: number;
  color_class: 'grey' | 'magenta' | 'skyblue';
  available: boolean;
  justification?: JustificationRef;
}

export interface DebateRow {
  cause_level: 'general' | 'higher' | 'lower';
  effect_level: 'general' | 'higher' | 'lower';
  left: DebateBar;
  right: DebateBar;
}

export interface DebateChart {
  schema: number;
  kind: 'debate';
  left_var: string;
  right_var: string;
  rows: DebateRow[];
}

export interface ChartFinding {
  name: string;
  strength: 'weak' | 'medium' | 'strong';
  direction?: 'positive' | 'negative';
}

export interface EnvironmentChart {
  schema: number;
  kind: 'environment';
  cause: string;
  effect: string;
  cause_level: string;
  effect_level: string;
  confounders: ChartFinding[];
  mediators: ChartFinding[];
}

export interface LatentChart {
  schema: number;
  kind: 'latent';
  target: string;
  positives: ChartFinding[];
  negatives: ChartFinding[];
  categoricals: ChartFinding[];
}

export interface Justification {
  text: string;
  exchange_key: string;
  span: [number, number];
  spec_key?: string;
  name?: string;
  kind?: string;
  cause?: string;
  cause_level?: string;
  effect_level?: string;
}

export interface DebateResponse {
  chart: DebateChart;
  dominance: { verdict: string; confounder_likely: boolean };
  sign_patterns: { left: string; right: string };
  justifications: Justification[];
}

export interface EnvironmentResponse {
  chart: EnvironmentChart;
  justifications: Justification[];
  warnings: string[];
}

export interface LatentResponse {
  chart: LatentChart;
  justifications: Justification[];
}

export interface PatchResponse extends ModelPayload {
  bic_delta: { total: number; per_node: Record<string, number> } | null;
  bic_note?: string;
}
