// Application wiring: settings, parameter form, phase plane, release editor,
// debug panel. Parameter edits mark dependent overlays stale in the same
// synchronous update; the refresh action fetches equilibria and separatrix
// (cached by request key, deduplicated in flight).

import { ApiClient, ApiError } from './api.js';
import { DebugPanel } from './debugPanel.js';
import { PhasePlane } from './phasePlane.js';
import { ReleaseEditor } from './releaseEditor.js';
import { RATE_FIELDS, SessionState } from './state.js';
import type { EquilibriaResult, SeparatrixResult } from './types.js';

async function loadSettings(): Promise<{ serviceBaseUrl: string }> {
  const response = await fetch('./settings.json');
  return response.json();
}

function banner(text: string, kind: 'error' | 'info' = 'error'): void {
  const el = document.getElementById('banner');
  if (el) {
    el.textContent = text;
    el.className = text ? kind : '';
  }
}

async function refreshModel(session: SessionState, api: ApiClient): Promise<void> {
  const parameters = session.parameterPayload();
  try {
    const [eq, sep] = await Promise.all([
      api.post<EquilibriaResult>('/equilibria', { parameters }),
      api.post<SeparatrixResult>('/separatrix', { parameters }),
    ]);
    session.applyEquilibria(eq.result, eq.request_hash);
    session.applySeparatrix(sep.result, sep.request_hash);
    banner('');
  } catch (err) {
    if (err instanceof ApiError && err.status === 0) {
      banner('service unreachable; showing cached view read-only');
    } else if (err instanceof ApiError) {
      banner(`${err.code}: ${err.detail}`);
    } else {
      banner(String(err));
    }
  }
}

function buildParameterForm(
  root: HTMLElement,
  session: SessionState,
  onEdit: () => void,
): void {
  const rows = RATE_FIELDS.map(
    (field) => `
      <label>${field}
        <input name="${field}" type="number" step="any" value="${session.rates[field]}">
      </label>`,
  ).join('');
  root.innerHTML = `
    <h3>Parameters <span class="preset-flag">${session.usePreset ? '(wmelpop preset)' : '(custom)'}</span></h3>
    <form>${rows}</form>
    <button id="reset-preset">reset to wmelpop</button>
    <button id="refresh">compute equilibria + separatrix</button>
  `;
  for (const field of RATE_FIELDS) {
    const input = root.querySelector<HTMLInputElement>(`input[name="${field}"]`);
    input?.addEventListener('change', () => {
      session.setRate(field, Number(input.value));
      const flag = root.querySelector('.preset-flag');
      if (flag) flag.textContent = '(custom)';
    });
  }
  root.querySelector('#reset-preset')?.addEventListener('click', () => {
    session.resetToPreset();
    buildParameterForm(root, session, onEdit);
  });
  root.querySelector('#refresh')?.addEventListener('click', onEdit);
}

async function start(): Promise<void> {
  const settings = await loadSettings();
  const api = new ApiClient(settings.serviceBaseUrl);
  const session = new SessionState();

  const canvas = document.getElementById('plane') as HTMLCanvasElement;
  const plane = new PhasePlane(canvas, session);
  session.subscribe(() => plane.draw());
  plane.onClick = (point) => session.setStart(point);

  const editorRoot = document.getElementById('editor');
  const paramsRoot = document.getElementById('params');
  const debugRoot = document.getElementById('debug');
  if (editorRoot) new ReleaseEditor(editorRoot, session, api);
  if (debugRoot) new DebugPanel(debugRoot, session, api);
  if (paramsRoot) {
    buildParameterForm(paramsRoot, session, () => void refreshModel(session, api));
  }

  await refreshModel(session, api);
  plane.draw();
}

void start();
