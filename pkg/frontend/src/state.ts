// Session state: the parameter form, the pending release plan, and the
// fetched overlays. Every overlay stores a service result verbatim together
// with the server's request hash (its provenance), and is flagged stale the
// moment an edit invalidates it; renderers show stale overlays greyed until
// fresh responses land.

import type {
  EquilibriaResult,
  ImpulsiveResult,
  ParamsIn,
  PhasePoint,
  Rates,
  RateField,
  SeparatrixResult,
} from './types.js';

export interface Release {
  day: number;
  size: number;
}

export interface Overlay<T> {
  data: T;
  requestHash: string;
  stale: boolean;
}

export const RATE_FIELDS: RateField[] = [
  'rho_n',
  'rho_w',
  'alpha_n',
  'alpha_w',
  'beta_n',
  'beta_w',
];

// Shipped defaults for the parameter form (the wMelPop preset's rates);
// these are model inputs mirrored in the form, not computed quantities.
export const DEFAULT_RATES: Rates = {
  rho_n: 4.55,
  rho_w: 2.27,
  alpha_n: 0.03333,
  alpha_w: 0.06666,
  beta_n: 2.61258e-3,
  beta_w: 3.12792e-3,
};

export type Listener = () => void;

export class SessionState {
  rates: Rates = { ...DEFAULT_RATES };
  usePreset = true; // requests send {preset: "wmelpop"} until a rate is edited
  start: PhasePoint | null = null;
  releases: Release[] = [];

  equilibria: Overlay<EquilibriaResult> | null = null;
  separatrix: Overlay<SeparatrixResult> | null = null;
  simulation: Overlay<ImpulsiveResult> | null = null;

  private listeners: Listener[] = [];

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  parameterPayload(): ParamsIn {
    return this.usePreset ? { preset: 'wmelpop' } : { ...this.rates };
  }

  setRate(field: RateField, value: number): void {
    this.rates[field] = value;
    this.usePreset = false;
    // every computed overlay depends on the parameters
    this.markStale(this.equilibria);
    this.markStale(this.separatrix);
    this.markStale(this.simulation);
    this.emit();
  }

  resetToPreset(): void {
    this.rates = { ...DEFAULT_RATES };
    this.usePreset = true;
    this.markStale(this.equilibria);
    this.markStale(this.separatrix);
    this.markStale(this.simulation);
    this.emit();
  }

  setStart(point: PhasePoint | null): void {
    this.start = point;
    this.markStale(this.simulation);
    this.emit();
  }

  addRelease(release: Release): void {
    this.releases.push(release);
    this.releases.sort((a, b) => a.day - b.day);
    this.markStale(this.simulation);
    this.emit();
  }

  updateRelease(index: number, release: Release): void {
    this.releases[index] = release;
    this.releases.sort((a, b) => a.day - b.day);
    this.markStale(this.simulation);
    this.emit();
  }

  removeRelease(index: number): void {
    this.releases.splice(index, 1);
    this.markStale(this.simulation);
    this.emit();
  }

  clearReleases(): void {
    this.releases = [];
    this.markStale(this.simulation);
    this.emit();
  }

  loadPlanAsReleases(lambdaHat: number, tau: number, count: number): void {
    this.releases = Array.from({ length: count }, (_, i) => ({
      day: i * tau,
      size: lambdaHat,
    }));
    this.markStale(this.simulation);
    this.emit();
  }

  applyEquilibria(data: EquilibriaResult, requestHash: string): void {
    this.equilibria = { data, requestHash, stale: false };
    this.emit();
  }

  applySeparatrix(data: SeparatrixResult, requestHash: string): void {
    this.separatrix = { data, requestHash, stale: false };
    this.emit();
  }

  applySimulation(data: ImpulsiveResult, requestHash: string): void {
    this.simulation = { data, requestHash, stale: false };
    this.emit();
  }

  clearSimulation(): void {
    this.simulation = null;
    this.emit();
  }

  private markStale<T>(overlay: Overlay<T> | null): void {
    if (overlay !== null) overlay.stale = true;
  }

  // provenance table for the debug panel: every displayed dataset with the
  // server hash it came from
  overlayProvenance(): { name: string; requestHash: string; stale: boolean }[] {
    const rows: { name: string; requestHash: string; stale: boolean }[] = [];
    if (this.equilibria) {
      rows.push({
        name: 'equilibria',
        requestHash: this.equilibria.requestHash,
        stale: this.equilibria.stale,
      });
    }
    if (this.separatrix) {
      rows.push({
        name: 'separatrix',
        requestHash: this.separatrix.requestHash,
        stale: this.separatrix.stale,
      });
    }
    if (this.simulation) {
      rows.push({
        name: 'simulation',
        requestHash: this.simulation.requestHash,
        stale: this.simulation.stale,
      });
    }
    return rows;
  }
}

// Read the threshold value for a hovered wild-population size straight off
// the fetched polyline: nearest vertex, no interpolation, so the displayed
// number is one the server actually sent.
export function thresholdReadout(
  separatrix: SeparatrixResult,
  n: number,
): PhasePoint | null {
  const points = separatrix.points;
  if (points.length === 0) return null;
  let best = points[0];
  let bestGap = Math.abs(points[0].n - n);
  for (const point of points) {
    const gap = Math.abs(point.n - n);
    if (gap < bestGap) {
      best = point;
      bestGap = gap;
    }
  }
  return best;
}
