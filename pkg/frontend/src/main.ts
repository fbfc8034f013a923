/** Browser entry point: boot the dashboard against the serving host. */

import { ApiClient } from './api.js';
import { createDashboard } from './app.js';

const root = document.getElementById('app');
if (root) {
  const api = new ApiClient('');
  const dashboard = createDashboard(root, api);
  const params = new URLSearchParams(window.location.search);
  const project = params.get('project');
  if (project) {
    void dashboard.open(project, params.get('model') ?? undefined);
  } else {
    const hint = document.createElement('p');
    hint.className = 'hint';
    hint.textContent =
      'Open with ?project=<id> (create one via the CLI or POST /projects).';
    root.appendChild(hint);
  }
}
