// Service client. Responses are cached by canonical request key, concurrent
// identical posts share one network call, and every exchange lands in the
// audit log that the debug panel renders.

import { requestKey } from './canonical.js';
import type { Envelope, ServiceError } from './types.js';

export interface AuditEntry {
  seq: number;
  path: string;
  clientKey: string;
  serverHash: string | null;
  status: number | 'network-error';
  fromCache: boolean;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

type FetchLike = (url: string, init: RequestInit) => Promise<Response>;

export class ApiClient {
  private cache = new Map<string, Envelope<unknown>>();
  private inFlight = new Map<string, Promise<Envelope<unknown>>>();
  readonly audit: AuditEntry[] = [];
  private seq = 0;

  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async post<T>(path: string, body: unknown): Promise<Envelope<T>> {
    const key = await requestKey(path, body);
    const cached = this.cache.get(key);
    if (cached !== undefined) {
      this.record(path, key, cached.request_hash, 200, true);
      return cached as Envelope<T>;
    }
    const pending = this.inFlight.get(key);
    if (pending !== undefined) {
      return pending as Promise<Envelope<T>>;
    }
    const promise = this.send<T>(path, body, key);
    this.inFlight.set(key, promise as Promise<Envelope<unknown>>);
    try {
      const envelope = await promise;
      this.cache.set(key, envelope as Envelope<unknown>);
      return envelope;
    } finally {
      this.inFlight.delete(key);
    }
  }

  private async send<T>(path: string, body: unknown, key: string): Promise<Envelope<T>> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify(body),
      });
    } catch (err) {
      this.record(path, key, null, 'network-error', false);
      throw new ApiError(0, 'unreachable', String(err));
    }
    const payload = (await response.json()) as Envelope<T> & ServiceError;
    const serverHash = payload.request_hash ?? null;
    this.record(path, key, serverHash, response.status, false);
    if (!response.ok || payload.error !== undefined) {
      const error = payload.error ?? { code: `http_${response.status}`, detail: '' };
      throw new ApiError(response.status, error.code, error.detail);
    }
    return payload;
  }

  private record(
    path: string,
    clientKey: string,
    serverHash: string | null,
    status: number | 'network-error',
    fromCache: boolean,
  ): void {
    this.audit.push({
      seq: this.seq++,
      path,
      clientKey,
      serverHash,
      status,
      fromCache,
    });
  }
}

// Rapid edits fire overlapping requests; only the most recent result may be
// applied. Stale completions resolve to null instead of clobbering state.
export class LatestWins {
  private token = 0;

  async run<T>(work: () => Promise<T>): Promise<T | null> {
    const mine = ++this.token;
    const value = await work();
    return this.token === mine ? value : null;
  }
}
