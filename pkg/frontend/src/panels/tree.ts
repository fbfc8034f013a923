/** Control panel: project info plus the model tree for version control. */

import type { ProjectPayload } from '../types.js';

export interface TreeCallbacks {
  onSelectModel?: (modelId: string) => void;
  onCreateSubgraph?: () => void;
  onSplitBidirectional?: () => void;
}

export class ModelTreePanel {
  private activeModel: string | null = null;

  constructor(
    readonly root: HTMLElement,
    private readonly callbacks: TreeCallbacks = {},
  ) {
    root.classList.add('panel', 'tree-panel');
  }

  setActive(modelId: string): void {
    this.activeModel = modelId;
  }

  render(project: ProjectPayload): void {
    this.root.replaceChildren();
    const title = document.createElement('h2');
    title.textContent = 'Control Panel';
    this.root.appendChild(title);

    const meta = document.createElement('p');
    meta.className = 'project-meta';
    meta.textContent = project.domain
      ? `${project.name} — ${project.domain}`
      : project.name;
    this.root.appendChild(meta);

    const list = document.createElement('ul');
    list.className = 'model-tree';
    const byParent = new Map<string | null, string[]>();
    for (const [id, node] of Object.entries(project.tree.nodes)) {
      const bucket = byParent.get(node.parent) ?? [];
      bucket.push(id);
      byParent.set(node.parent, bucket);
    }
    const renderInto = (parentEl: HTMLElement, id: string): void => {
      const node = project.tree.nodes[id];
      const item = document.createElement('li');
      const button = document.createElement('button');
      button.type = 'button';
      button.className = 'tree-node' + (id === this.activeModel ? ' active' : '');
      button.dataset.modelId = id;
      button.textContent = `${node.name} (${node.n_variables}v/${node.n_edges}e)`;
      button.addEventListener('click', () => this.callbacks.onSelectModel?.(id));
      item.appendChild(button);
      const children = (byParent.get(id) ?? []).sort();
      if (children.length) {
        const sub = document.createElement('ul');
        for (const child of children) renderInto(sub, child);
        item.appendChild(sub);
      }
      parentEl.appendChild(item);
    };
    renderInto(list, project.tree.root);
    this.root.appendChild(list);

    const actions = document.createElement('div');
    actions.className = 'tree-actions';
    const subgraph = document.createElement('button');
    subgraph.type = 'button';
    subgraph.textContent = 'Create Sub-Graph';
    subgraph.addEventListener('click', () => this.callbacks.onCreateSubgraph?.());
    const split = document.createElement('button');
    split.type = 'button';
    split.textContent = 'Split Bidirectional Edge';
    split.addEventListener('click', () =>
      this.callbacks.onSplitBidirectional?.(),
    );
    actions.append(subgraph, split);
    this.root.appendChild(actions);
  }
}
