// Audit panel: every displayed dataset with the server request hash it came
// from, plus the full exchange log. This is how a reviewer verifies the "no
// client-side model math" rule: each number on screen belongs to an overlay,
// and each overlay row names the response that produced it.

import type { ApiClient } from './api.js';
import type { SessionState } from './state.js';

export class DebugPanel {
  constructor(
    private root: HTMLElement,
    private session: SessionState,
    private api: ApiClient,
  ) {
    this.render();
    session.subscribe(() => this.render());
  }

  render(): void {
    const overlays = this.session
      .overlayProvenance()
      .map(
        (row) =>
          `<tr><td>${row.name}</td><td class="hash">${row.requestHash.slice(0, 16)}…</td>` +
          `<td>${row.stale ? 'stale' : 'fresh'}</td></tr>`,
      )
      .join('');
    const exchanges = this.api.audit
      .slice(-12)
      .reverse()
      .map(
        (entry) =>
          `<tr><td>${entry.seq}</td><td>${entry.path}</td>` +
          `<td class="hash">${entry.serverHash ? entry.serverHash.slice(0, 16) + '…' : '-'}</td>` +
          `<td>${entry.fromCache ? 'cache' : entry.status}</td></tr>`,
      )
      .join('');
    this.root.innerHTML = `
      <h3>Debug audit</h3>
      <p class="note">every plotted number comes from a service response; rows
      below map each overlay to the request hash that produced it</p>
      <table><thead><tr><th>overlay</th><th>request hash</th><th>state</th></tr></thead>
      <tbody>${overlays || '<tr><td colspan="3">nothing fetched yet</td></tr>'}</tbody></table>
      <h4>recent exchanges</h4>
      <table><thead><tr><th>#</th><th>path</th><th>hash</th><th>status</th></tr></thead>
      <tbody>${exchanges || '<tr><td colspan="4">none</td></tr>'}</tbody></table>
    `;
  }
}
