import { describe, expect, it } from 'vitest';

import { canonicalJson, requestKey, sha256Hex } from '../src/canonical.js';

describe('canonicalJson', () => {
  it('sorts object keys recursively', () => {
    const a = canonicalJson({ b: 1, a: { d: 2, c: 3 } });
    const b = canonicalJson({ a: { c: 3, d: 2 }, b: 1 });
    expect(a).toBe('{"a":{"c":3,"d":2},"b":1}');
    expect(b).toBe(a);
  });

  it('preserves array order and drops undefined entries', () => {
    expect(canonicalJson({ xs: [3, 1, 2], skip: undefined })).toBe('{"xs":[3,1,2]}');
  });

  it('keeps float formatting stable', () => {
    expect(canonicalJson({ v: 2.61258e-3 })).toBe(canonicalJson({ v: 0.00261258 }));
  });
});

describe('sha256Hex', () => {
  it('matches the published test vector', async () => {
    expect(await sha256Hex('abc')).toBe(
      'ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad',
    );
  });
});

describe('requestKey', () => {
  it('is insensitive to key order, sensitive to values', async () => {
    const a = await requestKey('/simulate', { n0: 1, w0: 2 });
    const b = await requestKey('/simulate', { w0: 2, n0: 1 });
    const c = await requestKey('/simulate', { n0: 1, w0: 3 });
    expect(a).toBe(b);
    expect(a).not.toBe(c);
  });
});
