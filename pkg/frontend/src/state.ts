/** Dashboard view state: one active selection, pending findings held until
 * the analyst explicitly accepts them. */

import type { ChartFinding } from './types.js';

export type ChartTab = 'debate' | 'environment' | 'latent';

export interface Selection {
  kind: 'edge' | 'variable';
  id: string;
}

export interface PendingFinding {
  finding: ChartFinding;
  kind: 'confounder' | 'mediator' | 'latent';
  causeId?: string;
  effectId?: string;
  targetId?: string;
  causeLevel: string;
  effectLevel: string;
}

export class ViewState {
  projectId: string | null = null;
  modelId: string | null = null;
  private selection: Selection | null = null;
  activeTab: ChartTab = 'debate';
  /** Findings shown in charts but not yet committed to the graph. */
  readonly pending: PendingFinding[] = [];
  /** Highest applied response sequence per panel (stale-response guard). */
  private applied: Record<string, number> = {};

  select(selection: Selection | null): void {
    this.selection = selection; // at most one active selection
  }

  selected(): Selection | null {
    return this.selection;
  }

  /** Returns false when a newer response has already been applied. */
  apply(panel: string, sequence: number): boolean {
    if ((this.applied[panel] ?? 0) > sequence) {
      return false;
    }
    this.applied[panel] = sequence;
    return true;
  }

  queueFinding(pending: PendingFinding): void {
    this.pending.push(pending);
  }

  takeFinding(name: string): PendingFinding | undefined {
    const index = this.pending.findIndex((p) => p.finding.name === name);
    if (index < 0) {
      return undefined;
    }
    return this.pending.splice(index, 1)[0];
  }
}
