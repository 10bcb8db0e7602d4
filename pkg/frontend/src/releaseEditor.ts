// What-if release editor: a list of (day, size) releases edited one at a
// time, a periodic-fill helper, and a minimal-plan button that loads the
// service's cheapest campaign for further manual tweaking. Every edit
// re-simulates through the service; the verdict badge mirrors the response's
// outcome field verbatim.

import type { ApiClient } from './api.js';
import { ApiError, LatestWins } from './api.js';
import type { SessionState } from './state.js';
import type { ImpulsiveResult, PlanResultPayload } from './types.js';

export class ReleaseEditor {
  private latest = new LatestWins();

  constructor(
    private root: HTMLElement,
    private session: SessionState,
    private api: ApiClient,
  ) {
    this.render();
    session.subscribe(() => this.render());
  }

  private async resimulate(): Promise<void> {
    const start = this.session.start;
    if (!start || this.session.releases.length === 0) {
      this.session.clearSimulation();
      return;
    }
    const body = {
      parameters: this.session.parameterPayload(),
      n0: start.n,
      w0: start.w,
      releases: this.session.releases.map((r) => ({ t: r.day, size: r.size })),
    };
    try {
      const envelope = await this.latest.run(() =>
        this.api.post<ImpulsiveResult>('/simulate-impulsive', body),
      );
      if (envelope !== null) {
        this.session.applySimulation(envelope.result, envelope.request_hash);
      }
    } catch (err) {
      this.showError(err);
    }
  }

  private async loadMinimalPlan(tau: number, budget: number): Promise<void> {
    const start = this.session.start;
    if (!start) {
      this.showError(new ApiError(0, 'no_start', 'click the phase plane to set a start first'));
      return;
    }
    const body = {
      parameters: this.session.parameterPayload(),
      n0: start.n,
      tau,
      max_releases: budget,
    };
    try {
      const envelope = await this.api.post<PlanResultPayload>('/plan', body);
      const plan = envelope.result;
      this.session.loadPlanAsReleases(plan.lambda_hat, plan.tau, plan.releases_used);
      await this.resimulate();
    } catch (err) {
      this.showError(err);
    }
  }

  private showError(err: unknown): void {
    const box = this.root.querySelector<HTMLElement>('.editor-error');
    if (box) {
      box.textContent = err instanceof ApiError ? `${err.code}: ${err.detail}` : String(err);
    }
  }

  private render(): void {
    const releases = this.session.releases;
    const sim = this.session.simulation;
    const verdict = sim
      ? `${sim.data.outcome}${sim.stale ? ' (stale)' : ''} after ${sim.data.jumps.length} releases`
      : 'no simulation yet';
    const rows = releases
      .map(
        (release, idx) => `
        <tr data-idx="${idx}">
          <td><input class="day" type="number" min="0" step="1" value="${release.day}"></td>
          <td><input class="size" type="number" min="0" step="1" value="${release.size.toFixed(1)}"></td>
          <td><button class="remove">x</button></td>
        </tr>`,
      )
      .join('');
    this.root.innerHTML = `
      <h3>What-if releases</h3>
      <div class="verdict ${sim?.data.outcome ?? ''}">${verdict}</div>
      <table class="releases">
        <thead><tr><th>day</th><th>size</th><th></th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
      <button class="add">add release</button>
      <button class="clear">clear</button>
      <fieldset class="periodic">
        <legend>fill periodic</legend>
        size <input class="p-size" type="number" value="743.4" size="8">
        every <input class="p-tau" type="number" value="1" size="4"> d
        x <input class="p-count" type="number" value="12" size="4">
        <button class="fill">fill</button>
        <button class="plan">minimal plan</button>
      </fieldset>
      <div class="editor-error"></div>
    `;
    this.wire();
  }

  private wire(): void {
    this.root.querySelectorAll<HTMLTableRowElement>('tr[data-idx]').forEach((row) => {
      const idx = Number(row.dataset.idx);
      const day = row.querySelector<HTMLInputElement>('.day');
      const size = row.querySelector<HTMLInputElement>('.size');
      const apply = () => {
        this.session.updateRelease(idx, {
          day: Number(day?.value ?? 0),
          size: Number(size?.value ?? 0),
        });
        void this.resimulate();
      };
      day?.addEventListener('change', apply);
      size?.addEventListener('change', apply);
      row.querySelector('.remove')?.addEventListener('click', () => {
        this.session.removeRelease(idx);
        void this.resimulate();
      });
    });
    this.root.querySelector('.add')?.addEventListener('click', () => {
      const last = this.session.releases[this.session.releases.length - 1];
      this.session.addRelease({
        day: last ? last.day + 1 : 0,
        size: last ? last.size : 500,
      });
      void this.resimulate();
    });
    this.root.querySelector('.clear')?.addEventListener('click', () => {
      this.session.clearReleases();
    });
    this.root.querySelector('.fill')?.addEventListener('click', () => {
      const size = Number(this.root.querySelector<HTMLInputElement>('.p-size')?.value ?? 0);
      const tau = Number(this.root.querySelector<HTMLInputElement>('.p-tau')?.value ?? 1);
      const count = Number(this.root.querySelector<HTMLInputElement>('.p-count')?.value ?? 1);
      this.session.loadPlanAsReleases(size, tau, count);
      void this.resimulate();
    });
    this.root.querySelector('.plan')?.addEventListener('click', () => {
      const tau = Number(this.root.querySelector<HTMLInputElement>('.p-tau')?.value ?? 1);
      const count = Number(this.root.querySelector<HTMLInputElement>('.p-count')?.value ?? 1);
      void this.loadMinimalPlan(tau, count);
    });
  }
}
