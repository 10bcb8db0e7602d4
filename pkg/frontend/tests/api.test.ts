import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError, LatestWins } from '../src/api.js';

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

function countingService(result: unknown = { ok: true }) {
  let calls = 0;
  const fetchImpl = async (_url: string, init: RequestInit) => {
    calls += 1;
    void init;
    await new Promise((resolve) => setTimeout(resolve, 5));
    return jsonResponse({
      request_hash: `server-${calls}`,
      result,
      diagnostics: { runtime_ms: 1, tolerances: {} },
    });
  };
  return { fetchImpl, callCount: () => calls };
}

describe('ApiClient caching', () => {
  it('serves identical bodies from cache after one network call', async () => {
    const service = countingService();
    const client = new ApiClient('http://svc', service.fetchImpl);
    const first = await client.post('/equilibria', { parameters: { preset: 'wmelpop' } });
    const second = await client.post('/equilibria', { parameters: { preset: 'wmelpop' } });
    expect(service.callCount()).toBe(1);
    expect(second).toBe(first);
    expect(client.audit).toHaveLength(2);
    expect(client.audit[1].fromCache).toBe(true);
  });

  it('keys the cache on canonical bodies, not key order', async () => {
    const service = countingService();
    const client = new ApiClient('http://svc', service.fetchImpl);
    await client.post('/simulate', { n0: 1, w0: 2 });
    await client.post('/simulate', { w0: 2, n0: 1 });
    expect(service.callCount()).toBe(1);
  });

  it('separates distinct bodies and paths', async () => {
    const service = countingService();
    const client = new ApiClient('http://svc', service.fetchImpl);
    await client.post('/simulate', { n0: 1 });
    await client.post('/simulate', { n0: 2 });
    await client.post('/plan', { n0: 1 });
    expect(service.callCount()).toBe(3);
  });

  it('deduplicates concurrent identical requests in flight', async () => {
    const service = countingService();
    const client = new ApiClient('http://svc', service.fetchImpl);
    const [a, b, c] = await Promise.all([
      client.post('/separatrix', { parameters: { preset: 'wmelpop' } }),
      client.post('/separatrix', { parameters: { preset: 'wmelpop' } }),
      client.post('/separatrix', { parameters: { preset: 'wmelpop' } }),
    ]);
    expect(service.callCount()).toBe(1);
    expect(a).toBe(b);
    expect(b).toBe(c);
  });
});

describe('ApiClient errors', () => {
  it('maps service errors to ApiError and does not cache them', async () => {
    let calls = 0;
    const client = new ApiClient('http://svc', async () => {
      calls += 1;
      return jsonResponse(
        { error: { code: 'model_validation', detail: 'bad n0' } },
        422,
      );
    });
    await expect(client.post('/simulate', { n0: -1 })).rejects.toThrowError(ApiError);
    await expect(client.post('/simulate', { n0: -1 })).rejects.toMatchObject({
      status: 422,
      code: 'model_validation',
    });
    expect(calls).toBe(2); // failures are retried, never cached
  });

  it('reports unreachable services distinctly', async () => {
    const client = new ApiClient('http://svc', async () => {
      throw new Error('connection refused');
    });
    await expect(client.post('/equilibria', {})).rejects.toMatchObject({
      status: 0,
      code: 'unreachable',
    });
    expect(client.audit[0].status).toBe('network-error');
  });

  it('records server hashes in the audit log', async () => {
    const service = countingService();
    const client = new ApiClient('http://svc', service.fetchImpl);
    await client.post('/equilibria', { parameters: { preset: 'wmelpop' } });
    expect(client.audit[0].serverHash).toBe('server-1');
    expect(client.audit[0].path).toBe('/equilibria');
  });
});

describe('LatestWins', () => {
  it('drops completions that were superseded', async () => {
    const latest = new LatestWins();
    let release!: (v: string) => void;
    const slow = latest.run(
      () => new Promise<string>((resolve) => (release = resolve)),
    );
    const fast = await latest.run(async () => 'fresh');
    release('stale');
    expect(fast).toBe('fresh');
    expect(await slow).toBeNull();
  });

  it('applies the only completion when nothing supersedes it', async () => {
    const latest = new LatestWins();
    expect(await latest.run(async () => 42)).toBe(42);
  });
});
