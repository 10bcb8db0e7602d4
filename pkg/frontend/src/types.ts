// Payload shapes of the wolbachia service. The client renders these numbers
// verbatim; it never derives model quantities of its own.

export type RateField =
  | 'rho_n'
  | 'rho_w'
  | 'alpha_n'
  | 'alpha_w'
  | 'beta_n'
  | 'beta_w';

export type Rates = Record<RateField, number>;

export type ParamsIn = { preset: string } | Rates;

export interface PhasePoint {
  n: number;
  w: number;
}

export interface Envelope<T> {
  request_hash: string;
  result: T;
  diagnostics: {
    runtime_ms: number;
    tolerances: Record<string, string>;
  };
}

export interface ServiceError {
  error: { code: string; detail: string };
  request_hash?: string;
  progress?: { cells_done: number; cells_total: number };
}

export interface EquilibriumRecord {
  label: string;
  state: PhasePoint;
  classification: string;
  eigenvalues: { re: number; im: number }[] | null;
  by_rule: boolean;
}

export interface EquilibriaResult {
  n_sharp: number;
  w_sharp: number;
  coexistence_feasible: boolean;
  equilibria: EquilibriumRecord[];
  nullclines: { dn_zero: PhasePoint[]; dw_zero: PhasePoint[] };
  validation: { ok: boolean; feasible: boolean; violations: string[] };
}

export interface SeparatrixResult {
  points: PhasePoint[];
  provenance: string;
  unstable_manifold?: { to_en: PhasePoint[]; to_ew: PhasePoint[] };
}

export interface ImpulsiveResult {
  t: number[];
  n: number[];
  w: number[];
  jumps: { t: number; dw: number; w_before: number; w_after: number }[];
  outcome: 'replacement' | 'failure' | 'budget-exhausted';
  releases_used: number;
  crossed_at: number | null;
}

export interface PlanResultPayload {
  n0: number;
  tau: number;
  lambda_hat: number;
  lambda_hat_frac: number;
  releases_used: number;
  total_released: number;
  duration_days: number;
  single_release_size: number;
}
