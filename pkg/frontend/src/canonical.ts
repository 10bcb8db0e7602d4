// Canonical request serialization for cache keys: stable key order so that
// semantically identical bodies map to one cache entry. The server's echoed
// request_hash is computed over its parsed form (defaults filled in), so the
// client key and the server hash are related but not equal; the client key
// gates caching and deduplication, the server hash feeds the audit panel.

export function canonicalJson(value: unknown): string {
  if (value === null || typeof value !== 'object') {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return '[' + value.map(canonicalJson).join(',') + ']';
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .filter(([, v]) => v !== undefined)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => JSON.stringify(k) + ':' + canonicalJson(v));
  return '{' + entries.join(',') + '}';
}

export async function sha256Hex(text: string): Promise<string> {
  const bytes = new TextEncoder().encode(text);
  const digest = await crypto.subtle.digest('SHA-256', bytes);
  return Array.from(new Uint8Array(digest))
    .map((b) => b.toString(16).padStart(2, '0'))
    .join('');
}

export async function requestKey(path: string, body: unknown): Promise<string> {
  return path + ':' + (await sha256Hex(canonicalJson(body)));
}
