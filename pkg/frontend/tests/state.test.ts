// Session invariants plus the round-trip acceptance check: fixtures are real
// service responses (regenerable via tests/fixtures in the repo root README);
// loading them must render four equilibria and the separatrix, give a
// replacement verdict consistent with the service's own outcome for the
// published daily-release row, and leave every displayed dataset traceable
// to a request hash with no client-side recomputation.

import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { SessionState, thresholdReadout } from '../src/state.js';
import type {
  EquilibriaResult,
  ImpulsiveResult,
  SeparatrixResult,
} from '../src/types.js';

import equilibriaFixture from './fixtures/equilibria.json';
import separatrixFixture from './fixtures/separatrix.json';
import impulsiveFixture from './fixtures/impulsive_table4_row.json';
import planFixture from './fixtures/plan_row.json';

const FIXTURES = [equilibriaFixture, separatrixFixture, impulsiveFixture, planFixture];

function fixtureClient(): ApiClient {
  return new ApiClient('http://svc', async (url, init) => {
    const body = JSON.parse(String(init.body));
    const match = FIXTURES.find(
      (f) => url.endsWith(f.path) && JSON.stringify(f.body) === JSON.stringify(body),
    );
    if (!match) throw new Error(`no fixture for ${url} ${init.body}`);
    return new Response(JSON.stringify(match.response), { status: 200 });
  });
}

describe('staleness flags', () => {
  it('parameter edits invalidate all overlays synchronously', () => {
    const session = new SessionState();
    session.applyEquilibria(equilibriaFixture.response.result as EquilibriaResult, 'h1');
    session.applySeparatrix(separatrixFixture.response.result as SeparatrixResult, 'h2');
    session.applySimulation(impulsiveFixture.response.result as ImpulsiveResult, 'h3');
    session.setRate('rho_w', 2.0);
    expect(session.equilibria?.stale).toBe(true);
    expect(session.separatrix?.stale).toBe(true);
    expect(session.simulation?.stale).toBe(true);
    expect(session.usePreset).toBe(false);
  });

  it('release edits invalidate only the simulation overlay', () => {
    const session = new SessionState();
    session.applyEquilibria(equilibriaFixture.response.result as EquilibriaResult, 'h1');
    session.applySimulation(impulsiveFixture.response.result as ImpulsiveResult, 'h3');
    session.addRelease({ day: 0, size: 100 });
    expect(session.simulation?.stale).toBe(true);
    expect(session.equilibria?.stale).toBe(false);
  });

  it('start changes invalidate the simulation overlay', () => {
    const session = new SessionState();
    session.applySimulation(impulsiveFixture.response.result as ImpulsiveResult, 'h3');
    session.setStart({ n: 10, w: 20 });
    expect(session.simulation?.stale).toBe(true);
  });

  it('fresh responses clear staleness', () => {
    const session = new SessionState();
    session.applyEquilibria(equilibriaFixture.response.result as EquilibriaResult, 'h1');
    session.setRate('rho_n', 4.0);
    expect(session.equilibria?.stale).toBe(true);
    session.applyEquilibria(equilibriaFixture.response.result as EquilibriaResult, 'h4');
    expect(session.equilibria?.stale).toBe(false);
  });
});

describe('release list editing', () => {
  it('keeps releases sorted by day', () => {
    const session = new SessionState();
    session.addRelease({ day: 3, size: 10 });
    session.addRelease({ day: 1, size: 20 });
    expect(session.releases.map((r) => r.day)).toEqual([1, 3]);
  });

  it('loads a plan as an editable periodic list', () => {
    const session = new SessionState();
    const plan = planFixture.response.result;
    session.loadPlanAsReleases(plan.lambda_hat, plan.tau, plan.releases_used);
    expect(session.releases).toHaveLength(plan.releases_used);
    expect(session.releases[0]).toEqual({ day: 0, size: plan.lambda_hat });
    expect(session.releases[1].day).toBe(plan.tau);
  });
});

describe('round trip against recorded service responses', () => {
  it('renders four equilibria and the separatrix from the preset', async () => {
    const api = fixtureClient();
    const session = new SessionState();
    const eq = await api.post<EquilibriaResult>('/equilibria', equilibriaFixture.body);
    const sep = await api.post<SeparatrixResult>('/separatrix', separatrixFixture.body);
    session.applyEquilibria(eq.result, eq.request_hash);
    session.applySeparatrix(sep.result, sep.request_hash);

    expect(session.equilibria?.data.equilibria.map((e) => e.label)).toEqual([
      'e0',
      'e_n',
      'e_w',
      'e_c',
    ]);
    const points = session.separatrix?.data.points ?? [];
    expect(points.length).toBeGreaterThan(100);
    for (let i = 1; i < points.length; i++) {
      expect(points[i].n).toBeGreaterThan(points[i - 1].n);
      expect(points[i].w).toBeGreaterThanOrEqual(points[i - 1].w);
    }
  });

  it('published daily-release row verdict matches the service outcome', async () => {
    const api = fixtureClient();
    const session = new SessionState();
    const sim = await api.post<ImpulsiveResult>(
      '/simulate-impulsive',
      impulsiveFixture.body,
    );
    session.applySimulation(sim.result, sim.request_hash);
    // verdict shown = outcome field, verbatim
    expect(session.simulation?.data.outcome).toBe(
      impulsiveFixture.response.result.outcome,
    );
    expect(session.simulation?.data.outcome).toBe('replacement');
    // ~12 daily releases of 0.43 n-sharp (the published row, +-1)
    expect(Math.abs(session.simulation!.data.releases_used - 12)).toBeLessThanOrEqual(1);
    expect(session.simulation?.data.jumps.length).toBe(
      session.simulation?.data.releases_used,
    );
  });

  it('keeps every displayed dataset verbatim and traceable to a hash', async () => {
    const api = fixtureClient();
    const session = new SessionState();
    const eq = await api.post<EquilibriaResult>('/equilibria', equilibriaFixture.body);
    const sep = await api.post<SeparatrixResult>('/separatrix', separatrixFixture.body);
    const sim = await api.post<ImpulsiveResult>(
      '/simulate-impulsive',
      impulsiveFixture.body,
    );
    session.applyEquilibria(eq.result, eq.request_hash);
    session.applySeparatrix(sep.result, sep.request_hash);
    session.applySimulation(sim.result, sim.request_hash);

    // no client-side numeric computation: overlays hold the response payloads
    // unchanged (deep equality with the recorded service results)
    expect(session.equilibria?.data).toEqual(equilibriaFixture.response.result);
    expect(session.separatrix?.data).toEqual(separatrixFixture.response.result);
    expect(session.simulation?.data).toEqual(impulsiveFixture.response.result);

    // the audit panel can map each overlay to its server-echoed request hash
    const provenance = session.overlayProvenance();
    expect(provenance.map((row) => row.name)).toEqual([
      'equilibria',
      'separatrix',
      'simulation',
    ]);
    const auditHashes = api.audit.map((entry) => entry.serverHash);
    for (const row of provenance) {
      expect(row.requestHash).toBeTruthy();
      expect(auditHashes).toContain(row.requestHash);
    }
  });

  it('threshold hover readout returns service vertices verbatim', async () => {
    const api = fixtureClient();
    const sep = await api.post<SeparatrixResult>('/separatrix', separatrixFixture.body);
    const vertex = thresholdReadout(sep.result, 1000.0);
    expect(vertex).not.toBeNull();
    expect(sep.result.points).toContainEqual(vertex);
  });
});
